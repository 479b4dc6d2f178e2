//! Dyadic gray-scale images, the orthonormal 2-D Haar transform, and
//! synthesis of images whose wavelet subband powers fall off by octave.

mod haar;
mod io;
mod synth;

pub use haar::{forward_haar, inverse_haar, Subbands, WaveletPyramid};
pub use io::{read_csv, read_hdg1, write_csv, write_hdg1, HDG1_HEADER_LEN, HDG1_MAGIC};
pub use synth::{
    expected_energy_per_pixel, limit_energy_per_pixel, mean_energy_per_pixel, radius_scaling_fit, synthesize,
    LevelNorm, RadiusFit, SubbandPowers,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("image side {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} pixel values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("pixel {index} is not finite")]
    NonFinite { index: usize },
    #[error("{levels} levels requested but the image supports at most {max}")]
    TooManyLevels { levels: usize, max: usize },
    #[error("invalid subband powers: {0}")]
    InvalidPowers(&'static str),
    #[error("radius fit needs {0}")]
    InsufficientData(&'static str),
    #[error("malformed image file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectraError>;

/// A square image with `side = 2^m` pixels per edge, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    side: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        if !side.is_power_of_two() {
            return Err(SpectraError::NotPowerOfTwo(side));
        }
        if values.len() != side * side {
            return Err(SpectraError::WrongLength { expected: side * side, got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectraError::NonFinite { index });
        }
        Ok(Self { side, values })
    }

    pub fn zeros(side: usize) -> Result<Self> {
        Self::new(side, vec![0.0; side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `log2(side)`.
    pub fn levels(&self) -> usize {
        self.side.trailing_zeros() as usize
    }

    pub fn pixels(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    /// Squared Euclidean norm.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        crate::stats::pairwise_sum(&sq)
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }
}

//! Small classifiers over resolution-`n` inputs, minimal adversarial
//! perturbations against them, and gradient-ascent fake examples.

mod ascent;
mod checkpoint;
mod data;
mod models;
mod perturb;
mod scaling;
mod train;

pub use ascent::{fake_example_ascent, uniform_noise, AscentResult, TARGET_CONFIDENCE};
pub use checkpoint::{read_model, write_model, HDGM_MAGIC, HDGM_VERSION};
pub use data::{Dataset, NegativeSpec, PositiveLaw};
pub use models::{Classifier, LinearModel, MlpModel, Model, ShapeClassifier};
pub use perturb::{min_perturbation_exact, min_perturbation_linear, min_perturbation_search, PerturbationResult, SearchConfig};
pub use scaling::{scaling_experiment, PerNResult, ScalingMode, ScalingResult, MIN_ACCURACY};
pub use train::{accuracy, train, train_model, ModelKind, SgdConfig, SyntheticSystem, SystemSpec, TrainReport};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversarialError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("the model has zero margin at the input; no class to flip away from")]
    ZeroMargin,
    #[error("no class flip found within radius {radius}")]
    NoFlipWithinBudget { radius: f64 },
    #[error("zero gradient at the start point")]
    NoAscentDirection,
    #[error("validation accuracy {accuracy} is below {required}")]
    LowAccuracy { accuracy: f64, required: f64 },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

impl From<std::io::Error> for AdversarialError {
    fn from(e: std::io::Error) -> Self {
        AdversarialError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AdversarialError>;

pub(crate) fn invalid(msg: impl Into<String>) -> AdversarialError {
    AdversarialError::InvalidParameter(msg.into())
}

/// Sequential dot product. Summation order is fixed left to right, so
/// appending zeros to both vectors leaves the result bit-identical.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

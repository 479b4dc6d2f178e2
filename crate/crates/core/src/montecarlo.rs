//! Seeded Monte-Carlo estimators over [`ShapeSpec`] bodies.
//!
//! Work is cut into fixed chunks of [`CHUNK`] samples, chunk `i` drawing from
//! `seed.substream(i)`. Chunk statistics are merged pairwise in chunk order,
//! so an estimate depends on the seed and sample count only, never on the
//! number of worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{GeometryError, ShapeKind, ShapeSpec, SurfaceDistance};
use crate::seed::Seed;
use crate::stats::pairwise_sum;

pub const CHUNK: usize = 4096;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("comparing a ball with its equal-volume ball is vacuous")]
    BallComparison,
}

pub type Result<T> = std::result::Result<T, MonteCarloError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator) over `sqrt(n_samples)`.
    pub stderr: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(values: &[f64]) -> Self {
        let count = values.len();
        let mean = pairwise_sum(values) / count as f64;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        Moments { count, mean, m2: pairwise_sum(&dev) }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        let count = a.count + b.count;
        let delta = b.mean - a.mean;
        let wb = b.count as f64 / count as f64;
        Moments {
            count,
            mean: a.mean + delta * wb,
            m2: a.m2 + b.m2 + delta * delta * a.count as f64 * wb,
        }
    }

    fn merge_all(parts: &[Moments]) -> Moments {
        if parts.len() == 1 {
            return parts[0];
        }
        let mid = parts.len() / 2;
        Moments::merge(Moments::merge_all(&parts[..mid]), Moments::merge_all(&parts[mid..]))
    }

    fn estimate(self) -> Estimate {
        let n = self.count as f64;
        Estimate {
            mean: self.mean,
            stderr: (self.m2 / (n - 1.0) / n).sqrt(),
            n_samples: self.count,
        }
    }
}

fn chunk_ranges(n_samples: usize) -> Vec<(u64, usize)> {
    (0..n_samples.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(n_samples - c * CHUNK)))
        .collect()
}

/// Mean and standard error of `f` over `n_samples` draws.
fn estimate_with<F>(n_samples: usize, seed: Seed, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>) -> f64 + Sync,
{
    if n_samples < MIN_SAMPLES {
        return Err(MonteCarloError::TooFewSamples { min: MIN_SAMPLES, got: n_samples });
    }
    let parts: Vec<Moments> = chunk_ranges(n_samples)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seed.substream(c).rng();
            let mut scratch = Vec::new();
            let values: Vec<f64> = (0..len).map(|_| f(&mut rng, &mut scratch)).collect();
            Moments::of(&values)
        })
        .collect();
    Ok(Moments::merge_all(&parts).estimate())
}

/// `U^(1/n)` for `U` uniform on `(0, 1]`, via `exp(ln U / n)`.
fn radial_fraction(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    (u.ln() / n as f64).exp()
}

fn fill_uniform(shape: &ShapeSpec, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    match shape.kind() {
        ShapeKind::Box => {
            for (x, h) in out.iter_mut().zip(shape.sizes()) {
                *x = h * rng.random_range(-1.0..=1.0);
            }
        }
        ShapeKind::Ball | ShapeKind::Ellipsoid => {
            let mut norm2 = 0.0;
            for x in out.iter_mut() {
                *x = rng.sample(StandardNormal);
                norm2 += *x * *x;
            }
            while norm2 == 0.0 {
                norm2 = 0.0;
                for x in out.iter_mut() {
                    *x = rng.sample(StandardNormal);
                    norm2 += *x * *x;
                }
            }
            let r = radial_fraction(rng, shape.dim()) / norm2.sqrt();
            for (i, x) in out.iter_mut().enumerate() {
                *x *= r * shape.axis_size(i);
            }
        }
    }
}

/// One point drawn uniformly by volume from the shape.
pub fn sample_uniform(shape: &ShapeSpec, seed: Seed) -> Vec<f64> {
    let mut out = vec![0.0; shape.dim()];
    fill_uniform(shape, &mut seed.rng(), &mut out);
    out
}

/// `count` uniform points, flattened row-major (`count * dim` values).
pub fn sample_points(shape: &ShapeSpec, count: usize, seed: Seed) -> Vec<f64> {
    let dim = shape.dim();
    let blocks: Vec<Vec<f64>> = chunk_ranges(count)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seed.substream(c).rng();
            let mut block = vec![0.0; len * dim];
            for p in block.chunks_exact_mut(dim) {
                fill_uniform(shape, &mut rng, p);
            }
            block
        })
        .collect();
    blocks.concat()
}

/// Distance to the boundary of a fresh uniform sample.
fn sample_distance(shape: &ShapeSpec, rng: &mut ChaCha8Rng, scratch: &mut Vec<f64>) -> f64 {
    if shape.kind() == ShapeKind::Ball {
        // Only the radius matters: R - R U^(1/n) = -R expm1(ln U / n).
        let u = 1.0 - rng.random::<f64>();
        return -shape.sizes()[0] * (u.ln() / shape.dim() as f64).exp_m1();
    }
    scratch.resize(shape.dim(), 0.0);
    fill_uniform(shape, rng, scratch);
    match shape.distance_to_surface(scratch) {
        Ok(SurfaceDistance::Inside(d)) => d,
        // Rounding can push a box sample a hair past the boundary.
        _ => 0.0,
    }
}

/// Fraction of uniform samples within absolute distance `beta` of the boundary.
pub fn estimate_band_probability(shape: &ShapeSpec, beta: f64, n_samples: usize, seed: Seed) -> Result<Estimate> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(MonteCarloError::InvalidParameter { name: "beta", value: beta, expected: "a finite value >= 0" });
    }
    estimate_with(n_samples, seed, |rng, scratch| {
        if sample_distance(shape, rng, scratch) <= beta { 1.0 } else { 0.0 }
    })
}

/// Fraction of uniform samples within `alpha * radius` of the boundary.
pub fn estimate_shell_probability(shape: &ShapeSpec, alpha: f64, n_samples: usize, seed: Seed) -> Result<Estimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MonteCarloError::InvalidParameter { name: "alpha", value: alpha, expected: "0 < alpha <= 1" });
    }
    estimate_band_probability(shape, alpha * shape.radius(), n_samples, seed)
}

pub fn estimate_expected_surface_distance(shape: &ShapeSpec, n_samples: usize, seed: Seed) -> Result<Estimate> {
    estimate_with(n_samples, seed, |rng, scratch| sample_distance(shape, rng, scratch))
}

/// Mean boundary distance of a body against the ball of equal volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoperimetricComparison {
    pub e_shape: Estimate,
    pub e_ball: Estimate,
    pub ball_radius: f64,
    /// `e_shape.mean / e_ball.mean`.
    pub ratio: f64,
}

impl IsoperimetricComparison {
    /// Combined standard error of the difference of the two means.
    pub fn combined_stderr(&self) -> f64 {
        self.e_shape.stderr.hypot(self.e_ball.stderr)
    }
}

fn equal_volume_ball(shape: &ShapeSpec) -> Result<ShapeSpec> {
    if shape.kind() == ShapeKind::Ball {
        return Err(MonteCarloError::BallComparison);
    }
    Ok(shape.equal_volume_ball())
}

pub fn isoperimetric_compare(shape: &ShapeSpec, n_samples: usize, seed: Seed) -> Result<IsoperimetricComparison> {
    let ball = equal_volume_ball(shape)?;
    let e_shape = estimate_expected_surface_distance(shape, n_samples, seed.substream(u64::MAX - 1))?;
    let e_ball = estimate_expected_surface_distance(&ball, n_samples, seed.substream(u64::MAX - 2))?;
    Ok(IsoperimetricComparison {
        e_shape,
        e_ball,
        ball_radius: ball.radius(),
        ratio: e_shape.mean / e_ball.mean,
    })
}

/// Boundary-band probability of a body against the ball of equal volume, for
/// a common absolute band `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellComparison {
    pub beta: f64,
    pub ball_radius: f64,
    pub p_shape: Estimate,
    pub p_ball: Estimate,
    /// `1 - (1 - beta / R_ball)^n`.
    pub p_ball_exact: f64,
}

impl ShellComparison {
    pub fn combined_stderr(&self) -> f64 {
        self.p_shape.stderr.hypot(self.p_ball.stderr)
    }
}

/// Uses the band `beta = (1 - 2^(-1/n)) R_ball`, for which the ball's band
/// probability is exactly one half, so neither side saturates.
pub fn isoperimetric_shell_compare(shape: &ShapeSpec, n_samples: usize, seed: Seed) -> Result<ShellComparison> {
    let ball = equal_volume_ball(shape)?;
    let n = shape.dim();
    let r = ball.radius();
    let alpha = -(-(2.0f64.ln()) / n as f64).exp_m1();
    let beta = alpha * r;
    let p_shape = estimate_band_probability(shape, beta, n_samples, seed.substream(u64::MAX - 3))?;
    let p_ball = estimate_band_probability(&ball, beta, n_samples, seed.substream(u64::MAX - 4))?;
    Ok(ShellComparison {
        beta,
        ball_radius: r,
        p_shape,
        p_ball,
        p_ball_exact: crate::geometry::shell_probability(n, alpha)?,
    })
}

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{invalid, Result};
use crate::geometry::ShapeSpec;
use crate::montecarlo::{sample_points, CHUNK};
use crate::seed::Seed;

/// Labelled points, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    fn push_class(&mut self, points: Vec<f64>, label: usize) {
        self.y.extend(std::iter::repeat_n(label, points.len() / self.dim));
        self.x.extend(points);
    }

    /// Two spherical Gaussian clouds with unit variance whose means sit at
    /// `-separation/2` and `+separation/2` along the first axis.
    pub fn gaussian_blobs(dim: usize, per_class: usize, separation: f64, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let mut d = Dataset { dim, x: Vec::with_capacity(2 * per_class * dim), y: Vec::new() };
        for label in 0..2 {
            let shift = if label == 1 { 0.5 * separation } else { -0.5 * separation };
            let pts: Vec<f64> = (0..per_class * dim)
                .map(|i| rng.sample::<f64, _>(StandardNormal) + if i % dim == 0 { shift } else { 0.0 })
                .collect();
            d.push_class(pts, label);
        }
        d
    }
}

/// Positive-class geometry as a function of resolution `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositiveLaw {
    /// Ball of radius `scale * sqrt(n)`.
    SqrtNBall { scale: f64 },
    /// Ball of fixed radius.
    ConstantBall { radius: f64 },
    /// Cube covering the `bits`-bit intensity range, centred: half-width
    /// `(2^bits - 1) / 2` per pixel.
    KBitBox { bits: u32 },
}

impl PositiveLaw {
    pub fn shape(&self, n: usize) -> Result<ShapeSpec> {
        Ok(match *self {
            PositiveLaw::SqrtNBall { scale } => ShapeSpec::ball(n, scale * (n as f64).sqrt())?,
            PositiveLaw::ConstantBall { radius } => ShapeSpec::ball(n, radius)?,
            PositiveLaw::KBitBox { bits } => {
                if !(1..=32).contains(&bits) {
                    return Err(invalid(format!("bits = {bits}, need 1..=32")));
                }
                ShapeSpec::axis_box(vec![((1u64 << bits) - 1) as f64 / 2.0; n])?
            }
        })
    }
}

/// Negative-class samples around the positive shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NegativeSpec {
    /// Uniform in the spherical shell between `inner * R` and `outer * R`,
    /// `R` the positive shape's radius.
    Shell { inner: f64, outer: f64 },
    /// Uniform in the cube of half-width `factor` times the largest
    /// semi-axis of the positive shape, minus the shape itself.
    BoxComplement { factor: f64 },
}

impl NegativeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NegativeSpec::Shell { inner, outer } if inner >= 1.0 && outer > inner && outer.is_finite() => Ok(()),
            NegativeSpec::BoxComplement { factor } if factor > 1.0 && factor.is_finite() => Ok(()),
            other => Err(invalid(format!("invalid negative spec {other:?}"))),
        }
    }

    /// Largest distance from the origin a negative sample can have.
    pub fn enclosing_radius(&self, positive: &ShapeSpec) -> f64 {
        let n = positive.dim() as f64;
        match *self {
            NegativeSpec::Shell { outer, .. } => outer * positive.radius(),
            NegativeSpec::BoxComplement { factor } => cube_half_width(factor, positive) * n.sqrt(),
        }
    }

    pub fn sample(&self, positive: &ShapeSpec, count: usize, seed: Seed) -> Result<Vec<f64>> {
        self.validate()?;
        let n = positive.dim();
        let r = positive.radius();
        let blocks: Vec<Vec<f64>> = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let len = CHUNK.min(count - c * CHUNK);
                let mut rng = seed.substream(c as u64).rng();
                let mut out = Vec::with_capacity(len * n);
                let mut p = vec![0.0; n];
                for _ in 0..len {
                    match *self {
                        NegativeSpec::Shell { inner, outer } => {
                            // radius law r^(n-1) on [inner R, outer R]
                            let rho = (n as f64 * (inner / outer).ln()).exp();
                            let u: f64 = rng.random();
                            let rad = outer * r * ((rho + u * (1.0 - rho)).ln() / n as f64).exp();
                            let mut s2: f64 = 0.0;
                            while s2 == 0.0 {
                                s2 = 0.0;
                                for v in p.iter_mut() {
                                    *v = rng.sample(StandardNormal);
                                    s2 += *v * *v;
                                }
                            }
                            let scale = rad / s2.sqrt();
                            out.extend(p.iter().map(|v| v * scale));
                        }
                        NegativeSpec::BoxComplement { factor } => loop {
                            let h = cube_half_width(factor, positive);
                            for v in p.iter_mut() {
                                *v = rng.random_range(-h..=h);
                            }
                            if !positive.contains(&p).unwrap_or(false) {
                                out.extend_from_slice(&p);
                                break;
                            }
                        },
                    }
                }
                out
            })
            .collect();
        Ok(blocks.concat())
    }
}

fn cube_half_width(factor: f64, positive: &ShapeSpec) -> f64 {
    factor * positive.sizes().iter().copied().fold(0.0, f64::max)
}

/// Balanced positive (label 1) / negative (label 0) sample.
pub(crate) fn labelled_sample(positive: &ShapeSpec, negative: &NegativeSpec, per_class: usize, seed: Seed) -> Result<Dataset> {
    let mut d = Dataset { dim: positive.dim(), x: Vec::new(), y: Vec::new() };
    d.push_class(sample_points(positive, per_class, seed.substream(0)), 1);
    d.push_class(negative.sample(positive, per_class, seed.substream(1))?, 0);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_samples_stay_in_shell() {
        let ball = ShapeSpec::ball(7, 2.0).unwrap();
        let spec = NegativeSpec::Shell { inner: 1.0, outer: 1.5 };
        let pts = spec.sample(&ball, 5000, Seed::new(1)).unwrap();
        for p in pts.chunks(7) {
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((2.0 - 1e-12..=3.0 + 1e-12).contains(&r), "{r}");
        }
    }

    #[test]
    fn box_complement_excludes_positive() {
        let ball = ShapeSpec::ball(2, 1.0).unwrap();
        let spec = NegativeSpec::BoxComplement { factor: 1.5 };
        let pts = spec.sample(&ball, 2000, Seed::new(2)).unwrap();
        assert!(pts.chunks(2).all(|p| !ball.contains(p).unwrap()));
    }

    #[test]
    fn kbit_box() {
        let s = PositiveLaw::KBitBox { bits: 8 }.shape(3).unwrap();
        assert_eq!(s.sizes(), &[127.5; 3]);
        assert!(NegativeSpec::Shell { inner: 0.5, outer: 2.0 }.validate().is_err());
    }
}

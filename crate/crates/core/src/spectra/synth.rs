use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{inverse_haar, ImageGrid, Result, SpectraError, Subbands, WaveletPyramid};
use crate::seed::Seed;
use crate::stats::{linear_fit, pairwise_sum};

/// Per-pixel energies of the wavelet bands.
///
/// `l_ll` is the energy per pixel carried by the final LL coefficient. The
/// `h_*` values are the per-pixel energies of the coarsest detail octave;
/// octave `k` above it carries `h_lh / 2^k`, `h_hl / 2^k` and `h_hh / 4^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandPowers {
    pub l_ll: f64,
    pub h_lh: f64,
    pub h_hl: f64,
    pub h_hh: f64,
}

impl SubbandPowers {
    pub fn new(l_ll: f64, h_lh: f64, h_hl: f64, h_hh: f64) -> Result<Self> {
        let p = Self { l_ll, h_lh, h_hl, h_hh };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.l_ll, self.h_lh, self.h_hl, self.h_hh];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SpectraError::InvalidPowers("every power must be finite and >= 0"));
        }
        if all.iter().all(|v| *v == 0.0) {
            return Err(SpectraError::InvalidPowers("at least one power must be > 0"));
        }
        Ok(())
    }

    /// Per-pixel energy of each band at octave `k`: `(LH, HL, HH)`.
    pub fn octave(&self, k: usize) -> (f64, f64, f64) {
        let half = 0.5f64.powi(k as i32);
        (self.h_lh * half, self.h_hl * half, self.h_hh * half * half)
    }
}

/// Expected `||x||^2 / n` of a synthesized image with `m` levels:
/// `l + (h_lh + h_hl) sum_{k<m} 2^-k + h_hh sum_{k<m} 4^-k`.
pub fn expected_energy_per_pixel(m: usize, base: &SubbandPowers) -> f64 {
    let mut total = base.l_ll;
    for k in 0..m {
        let (lh, hl, hh) = base.octave(k);
        total += lh + hl + hh;
    }
    total
}

/// `l + 2 h_lh + 2 h_hl + (4/3) h_hh`, the `m -> infinity` limit.
pub fn limit_energy_per_pixel(base: &SubbandPowers) -> f64 {
    base.l_ll + 2.0 * base.h_lh + 2.0 * base.h_hl + 4.0 / 3.0 * base.h_hh
}

fn fill_gaussian(rng: &mut impl Rng, len: usize, sd: f64) -> Vec<f64> {
    (0..len).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Draws a `2^m x 2^m` image with independent Gaussian wavelet coefficients.
///
/// A band carrying per-pixel energy `e` with `c` coefficients gets
/// coefficient variance `e * 4^m / c`, so its expected energy is `e * 4^m`.
/// Coefficients are drawn coarse to fine (LL, then octave 0 LH/HL/HH, then
/// octave 1, ...), so two images from the same seed at different `m` share
/// their coarse structure.
pub fn synthesize(m: usize, base: &SubbandPowers, seed: Seed) -> Result<ImageGrid> {
    base.validate()?;
    let side = 1usize << m;
    let n = (side * side) as f64;
    let mut rng = seed.rng();
    let low = fill_gaussian(&mut rng, 1, (base.l_ll * n).sqrt());
    let mut coarse_to_fine = Vec::with_capacity(m);
    for k in 0..m {
        let s = 1usize << k;
        let count = (s * s) as f64;
        let (lh, hl, hh) = base.octave(k);
        coarse_to_fine.push(Subbands {
            side: s,
            lh: fill_gaussian(&mut rng, s * s, (lh * n / count).sqrt()),
            hl: fill_gaussian(&mut rng, s * s, (hl * n / count).sqrt()),
            hh: fill_gaussian(&mut rng, s * s, (hh * n / count).sqrt()),
        });
    }
    coarse_to_fine.reverse();
    inverse_haar(&WaveletPyramid { side, details: coarse_to_fine, low })
}

/// Mean `||x||^2 / n` over `draws` images, draw `i` seeded by `seed.substream(i)`.
pub fn mean_energy_per_pixel(m: usize, base: &SubbandPowers, draws: usize, seed: Seed) -> Result<f64> {
    let e: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|i| synthesize(m, base, seed.substream(i)).map(|img| img.energy() / img.pixels() as f64))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&e) / draws as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelNorm {
    pub m: usize,
    pub pixels: usize,
    pub mean_norm: f64,
}

/// Least-squares fit of `ln(mean ||x||)` against `ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub levels: Vec<LevelNorm>,
}

pub fn radius_scaling_fit(m_values: &[usize], samples_per_level: usize, base: &SubbandPowers, seed: Seed) -> Result<RadiusFit> {
    let mut distinct = m_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(SpectraError::InsufficientData("at least 3 distinct levels"));
    }
    if samples_per_level < 30 {
        return Err(SpectraError::InsufficientData("at least 30 samples per level"));
    }
    base.validate()?;
    let mut levels = Vec::with_capacity(distinct.len());
    for &m in &distinct {
        let norms: Vec<f64> = (0..samples_per_level as u64)
            .into_par_iter()
            .map(|i| synthesize(m, base, seed.substream(i)).map(|img| img.norm()))
            .collect::<Result<_>>()?;
        levels.push(LevelNorm { m, pixels: 1 << (2 * m), mean_norm: pairwise_sum(&norms) / norms.len() as f64 });
    }
    let xs: Vec<f64> = levels.iter().map(|l| (l.pixels as f64).ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.mean_norm.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(SpectraError::InsufficientData("distinct levels"))?;
    Ok(RadiusFit { slope: fit.slope, slope_stderr: fit.slope_stderr, intercept: fit.intercept, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_sums() {
        let b = SubbandPowers::new(0.0, 1.0, 1.0, 3.0).unwrap();
        assert!((limit_energy_per_pixel(&b) - 8.0).abs() < 1e-15);
        assert!((expected_energy_per_pixel(60, &b) - 8.0).abs() < 1e-12);
        assert_eq!(expected_energy_per_pixel(1, &b), 5.0);
        assert_eq!(expected_energy_per_pixel(0, &b), 0.0);
    }

    #[test]
    fn flat_base_is_constant_and_exactly_root_n() {
        let b = SubbandPowers::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let fit = radius_scaling_fit(&[3, 4, 5, 6, 7], 30, &b, Seed::new(2)).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12, "{}", fit.slope);
        let img = synthesize(3, &b, Seed::new(1)).unwrap();
        assert!(img.values().iter().all(|v| (v - img.values()[0]).abs() < 1e-12));
    }

    #[test]
    fn energy_tracks_truncated_sum() {
        let b = SubbandPowers::new(1.0, 1.0, 1.0, 1.0).unwrap();
        for m in 1..=5 {
            let e = mean_energy_per_pixel(m, &b, 2000, Seed::new(3)).unwrap();
            let want = expected_energy_per_pixel(m, &b);
            assert!((e / want - 1.0).abs() < 0.05, "m={m}: {e} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SubbandPowers::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SubbandPowers::new(-1.0, 1.0, 0.0, 0.0).is_err());
        let b = SubbandPowers::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(radius_scaling_fit(&[3, 4], 30, &b, Seed::new(0)).is_err());
        assert!(radius_scaling_fit(&[3, 4, 4], 30, &b, Seed::new(0)).is_err());
        assert!(radius_scaling_fit(&[3, 4, 5], 1, &b, Seed::new(0)).is_err());
    }
}

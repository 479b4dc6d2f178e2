use rayon::prelude::*;

use super::models::{Classifier, ShapeClassifier};
use super::perturb::{min_perturbation_exact, min_perturbation_search, PerturbationResult, SearchConfig};
use super::train::{train, SgdConfig, SystemSpec};
use super::{invalid, AdversarialError, Result};
use crate::montecarlo::sample_points;
use crate::seed::Seed;
use crate::stats::{linear_fit, mean_stderr};

/// Validation accuracy below which a trained system is not measured.
pub const MIN_ACCURACY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingMode {
    /// No training: the classifier is exact membership in the positive
    /// shape and each sampled point's flip distance is computed in closed
    /// form.
    Idealized,
    /// Train a fresh system per `n` and search for perturbations with
    /// relative tolerance `tol`.
    Trained { sgd: SgdConfig, tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerNResult {
    pub n: usize,
    pub mean_norm: f64,
    pub stderr: f64,
    /// Points whose perturbation entered the mean.
    pub points: usize,
    /// Positively classified points where the search failed.
    pub failures: usize,
    pub train_accuracy: Option<f64>,
    pub val_accuracy: Option<f64>,
    /// Why this `n` was left out of the fit, if it was.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub per_n: Vec<PerNResult>,
    /// Slope of `ln(mean norm)` against `ln n` over the non-aborted `n`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub intercept: f64,
}

fn validate_grid(n_values: &[usize]) -> Result<()> {
    let min = n_values.iter().copied().min().unwrap_or(0);
    let max = n_values.iter().copied().max().unwrap_or(0);
    if n_values.len() < 4 || min == 0 || max < 4 * min {
        return Err(invalid("need at least 4 values of n spanning at least two octaves"));
    }
    Ok(())
}

/// Mean minimal-perturbation norm over positively classified points, for
/// each `n`, and the power law fitted through them.
///
/// `template.n` is ignored; system `i` is built at `n_values[i]` from
/// `seed.substream(i)`. In idealized mode `trials_per_n` points are drawn
/// from the positive shape; in trained mode the first `trials_per_n`
/// positively classified validation points are attacked.
pub fn scaling_experiment(
    n_values: &[usize],
    trials_per_n: usize,
    template: &SystemSpec,
    mode: &ScalingMode,
    seed: Seed,
) -> Result<ScalingResult> {
    validate_grid(n_values)?;
    if trials_per_n < 2 {
        return Err(invalid("trials_per_n must be >= 2"));
    }
    let per_n: Vec<PerNResult> = n_values
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let spec = SystemSpec { n, ..*template };
            let s = seed.substream(i as u64);
            match mode {
                ScalingMode::Idealized => idealized(&spec, trials_per_n, s),
                ScalingMode::Trained { sgd, tol } => trained(&spec, trials_per_n, sgd, *tol, s),
            }
        })
        .collect::<Result<_>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_n
        .iter()
        .filter(|r| r.aborted.is_none() && r.mean_norm > 0.0)
        .map(|r| ((r.n as f64).ln(), r.mean_norm.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    Ok(ScalingResult {
        exponent: fit.map_or(f64::NAN, |f| f.slope),
        exponent_stderr: fit.map_or(f64::NAN, |f| f.slope_stderr),
        intercept: fit.map_or(f64::NAN, |f| f.intercept),
        per_n,
    })
}

fn summarize(n: usize, norms: &[f64], failures: usize) -> PerNResult {
    let (mean_norm, stderr) = mean_stderr(norms).unwrap_or((f64::NAN, f64::NAN));
    let aborted = (norms.len() < 2).then(|| format!("only {} usable perturbations", norms.len()));
    PerNResult {
        n,
        mean_norm,
        stderr,
        points: norms.len(),
        failures,
        train_accuracy: None,
        val_accuracy: None,
        aborted,
    }
}

fn idealized(spec: &SystemSpec, trials: usize, seed: Seed) -> Result<PerNResult> {
    let model = ShapeClassifier { shape: spec.positive_shape()? };
    let n = spec.n;
    let xs = sample_points(&model.shape, trials, seed);
    let results: Vec<PerturbationResult> = xs
        .par_chunks_exact(n)
        .map(|x| min_perturbation_exact(&model, x))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = results.iter().filter(|r| r.flipped).map(|r| r.norm).collect();
    Ok(summarize(n, &norms, trials - norms.len()))
}

fn trained(spec: &SystemSpec, trials: usize, sgd: &SgdConfig, tol: f64, seed: Seed) -> Result<PerNResult> {
    let sys = train(spec, &SgdConfig { seed: seed.substream(0), ..*sgd })?;
    let n = spec.n;
    let mut report = PerNResult {
        n,
        mean_norm: f64::NAN,
        stderr: f64::NAN,
        points: 0,
        failures: 0,
        train_accuracy: Some(sys.train_accuracy),
        val_accuracy: Some(sys.val_accuracy),
        aborted: None,
    };
    if sys.val_accuracy < MIN_ACCURACY {
        let e = AdversarialError::LowAccuracy { accuracy: sys.val_accuracy, required: MIN_ACCURACY };
        report.aborted = Some(e.to_string());
        return Ok(report);
    }
    let max_radius = 10.0 * spec.negative.enclosing_radius(&sys.positive_shape);
    let val = &sys.validation;
    let chosen: Vec<usize> = (0..val.len())
        .filter(|&i| sys.model.classify(val.point(i)) == 1)
        .take(trials)
        .collect();
    let search = seed.substream(1);
    let outcomes: Vec<Option<f64>> = chosen
        .par_iter()
        .enumerate()
        .map(|(j, &i)| {
            let cfg = SearchConfig::new(tol, max_radius, search.substream(j as u64));
            match min_perturbation_search(&sys.model, val.point(i), &cfg) {
                Ok(r) if r.flipped => Some(r.norm),
                _ => None,
            }
        })
        .collect();
    let norms: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let summary = summarize(n, &norms, outcomes.len() - norms.len());
    Ok(PerNResult { train_accuracy: report.train_accuracy, val_accuracy: report.val_accuracy, ..summary })
}

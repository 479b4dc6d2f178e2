use rand::Rng;

use super::models::{check_dim, softmax, Classifier};
use super::{invalid, norm, AdversarialError, Result};
use crate::seed::Seed;

/// Confidence at which the ascent stops.
pub const TARGET_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub image: Vec<f64>,
    /// Target-class probability before the first step and after each step.
    pub trace: Vec<f64>,
    pub reached: bool,
}

impl AscentResult {
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn confidence(&self) -> f64 {
        *self.trace.last().unwrap_or(&0.0)
    }
}

/// `n` pixels drawn uniformly from `[-amplitude, amplitude]`.
pub fn uniform_noise(n: usize, amplitude: f64, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| rng.random_range(-amplitude..=amplitude)).collect()
}

/// Gradient ascent on the target class's log-probability, starting from
/// `start`, until its probability reaches 0.99 or `max_iters` steps.
pub fn fake_example_ascent(
    model: &impl Classifier,
    start: &[f64],
    target: usize,
    step: f64,
    max_iters: usize,
) -> Result<AscentResult> {
    check_dim(model, start)?;
    if target >= model.n_classes() {
        return Err(invalid(format!("target class {target} out of range")));
    }
    if !(step.is_finite() && step >= 0.0) {
        return Err(invalid(format!("step = {step}, need a finite value >= 0")));
    }
    let mut x = start.to_vec();
    let mut weights = vec![0.0; model.n_classes()];
    let mut trace = Vec::new();
    for it in 0..=max_iters {
        let p = softmax(&model.logits(&x));
        trace.push(p[target]);
        if p[target] >= TARGET_CONFIDENCE || it == max_iters {
            break;
        }
        for (c, w) in weights.iter_mut().enumerate() {
            *w = f64::from(u8::from(c == target)) - p[c];
        }
        let g = model.input_gradient(&x, &weights);
        if it == 0 && norm(&g) == 0.0 {
            return Err(AdversarialError::NoAscentDirection);
        }
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi += step * gi);
    }
    let reached = trace.last().is_some_and(|c| *c >= TARGET_CONFIDENCE);
    Ok(AscentResult { image: x, trace, reached })
}

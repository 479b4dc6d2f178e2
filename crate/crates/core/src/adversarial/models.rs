use rand::Rng;
use rand_distr::StandardNormal;

use super::{dot, invalid, AdversarialError, Result};
use crate::geometry::{ShapeSpec, SurfaceDistance};
use crate::seed::Seed;

/// A classifier with piecewise-linear logits.
pub trait Classifier: Sync {
    fn input_dim(&self) -> usize;

    fn n_classes(&self) -> usize;

    fn logits(&self, x: &[f64]) -> Vec<f64>;

    /// Gradient in `x` of `sum_c weights[c] * logit_c(x)`.
    fn input_gradient(&self, x: &[f64], weights: &[f64]) -> Vec<f64>;

    /// Arg-max class; ties go to the lower index.
    fn classify(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Binary linear classifier: class 1 iff `w . x + b > 0`. Its logits are
/// `[0, w . x + b]`, so softmax cross-entropy is the logistic loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub(crate) w: Vec<f64>,
    pub(crate) b: f64,
}

impl LinearModel {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        if w.is_empty() || w.iter().chain([&b]).any(|v| !v.is_finite()) {
            return Err(invalid("linear weights must be non-empty and finite"));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(invalid("linear weights must have nonzero norm"));
        }
        Ok(Self { w, b })
    }

    pub fn random(n: usize, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        let sd = 1.0 / (n as f64).sqrt();
        Self::new((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect(), 0.0)
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Vec<f64>, &mut f64) {
        (&mut self.w, &mut self.b)
    }
}

impl Classifier for LinearModel {
    fn input_dim(&self) -> usize {
        self.w.len()
    }

    fn n_classes(&self) -> usize {
        2
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0, self.score(x)]
    }

    fn input_gradient(&self, _x: &[f64], weights: &[f64]) -> Vec<f64> {
        self.w.iter().map(|w| w * weights[1]).collect()
    }
}

/// One hidden ReLU layer and a linear output per class. Weight matrices are
/// row-major with one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) n_in: usize,
    pub(crate) hidden: usize,
    pub(crate) classes: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

impl MlpModel {
    pub fn new(n_in: usize, hidden: usize, classes: usize, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        if n_in == 0 || hidden == 0 || classes < 2 {
            return Err(invalid("MLP needs n_in >= 1, hidden >= 1 and at least 2 classes"));
        }
        if w1.len() != hidden * n_in || b1.len() != hidden || w2.len() != classes * hidden || b2.len() != classes {
            return Err(invalid("MLP parameter shapes do not match the layer sizes"));
        }
        if w1.iter().chain(&b1).chain(&w2).chain(&b2).any(|v| !v.is_finite()) {
            return Err(invalid("MLP weights must be finite"));
        }
        Ok(Self { n_in, hidden, classes, w1, b1, w2, b2 })
    }

    /// He-normal hidden weights, Glorot-normal output weights, zero biases.
    pub fn random(n_in: usize, hidden: usize, classes: usize, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        let mut draw = |count: usize, sd: f64| -> Vec<f64> {
            (0..count).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let w1 = draw(hidden * n_in, (2.0 / n_in as f64).sqrt());
        let w2 = draw(classes * hidden, (2.0 / (hidden + classes) as f64).sqrt());
        Self::new(n_in, hidden, classes, w1, vec![0.0; hidden], w2, vec![0.0; classes])
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub(crate) fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| dot(&self.w1[j * self.n_in..(j + 1) * self.n_in], x) + self.b1[j])
            .collect()
    }

    pub(crate) fn output(&self, a: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| dot(&self.w2[c * self.hidden..(c + 1) * self.hidden], a) + self.b2[c])
            .collect()
    }
}

impl Classifier for MlpModel {
    fn input_dim(&self) -> usize {
        self.n_in
    }

    fn n_classes(&self) -> usize {
        self.classes
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let a: Vec<f64> = self.hidden_pre(x).into_iter().map(|z| z.max(0.0)).collect();
        self.output(&a)
    }

    fn input_gradient(&self, x: &[f64], weights: &[f64]) -> Vec<f64> {
        let z = self.hidden_pre(x);
        let mut g = vec![0.0; self.n_in];
        for (j, zj) in z.iter().enumerate() {
            if *zj <= 0.0 {
                continue;
            }
            let back: f64 = (0..self.classes).map(|c| weights[c] * self.w2[c * self.hidden + j]).sum();
            if back == 0.0 {
                continue;
            }
            for (gi, w) in g.iter_mut().zip(&self.w1[j * self.n_in..(j + 1) * self.n_in]) {
                *gi += back * w;
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl Classifier for Model {
    fn input_dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.input_dim(),
            Model::Mlp(m) => m.input_dim(),
        }
    }

    fn n_classes(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_classes(),
            Model::Mlp(m) => m.n_classes(),
        }
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Model::Linear(m) => m.logits(x),
            Model::Mlp(m) => m.logits(x),
        }
    }

    fn input_gradient(&self, x: &[f64], weights: &[f64]) -> Vec<f64> {
        match self {
            Model::Linear(m) => m.input_gradient(x, weights),
            Model::Mlp(m) => m.input_gradient(x, weights),
        }
    }
}

/// Exact membership in a shape: class 1 inside (boundary included), class 0
/// outside. Logits are `[0, +1]` inside and `[0, -1]` outside, so the input
/// gradient is zero everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeClassifier {
    pub shape: ShapeSpec,
}

impl Classifier for ShapeClassifier {
    fn input_dim(&self) -> usize {
        self.shape.dim()
    }

    fn n_classes(&self) -> usize {
        2
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let inside = matches!(self.shape.distance_to_surface(x), Ok(SurfaceDistance::Inside(_)));
        vec![0.0, if inside { 1.0 } else { -1.0 }]
    }

    fn input_gradient(&self, x: &[f64], _weights: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
}

pub(crate) fn check_dim(model: &impl Classifier, x: &[f64]) -> Result<()> {
    if x.len() != model.input_dim() {
        return Err(AdversarialError::DimensionMismatch { expected: model.input_dim(), got: x.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let m = MlpModel::random(5, 8, 3, Seed::new(1)).unwrap();
        let x = [0.3, -0.2, 0.5, 0.1, -0.7];
        let wts = [0.2, -1.0, 0.7];
        let f = |x: &[f64]| m.logits(x).iter().zip(&wts).map(|(l, w)| l * w).sum::<f64>();
        let g = m.input_gradient(&x, &wts);
        for i in 0..5 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (f(&xp) - f(&xm)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn linear_model_validation() {
        assert!(LinearModel::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(LinearModel::new(vec![], 1.0).is_err());
        assert!(LinearModel::new(vec![f64::NAN], 1.0).is_err());
        let m = LinearModel::new(vec![1.0, -1.0], 0.5).unwrap();
        assert_eq!(m.classify(&[0.0, 0.0]), 1);
        assert_eq!(m.classify(&[0.0, 1.0]), 0);
    }

    #[test]
    fn shape_classifier_membership() {
        let c = ShapeClassifier { shape: ShapeSpec::ball(2, 1.0).unwrap() };
        assert_eq!(c.classify(&[0.5, 0.5]), 1);
        assert_eq!(c.classify(&[1.0, 0.0]), 1);
        assert_eq!(c.classify(&[1.0, 0.1]), 0);
    }
}

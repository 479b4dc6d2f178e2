use rand::seq::SliceRandom;

use super::data::{labelled_sample, Dataset, NegativeSpec, PositiveLaw};
use super::models::{softmax, Classifier, LinearModel, MlpModel, Model};
use super::{invalid, AdversarialError, Result};
use crate::geometry::ShapeSpec;
use crate::seed::Seed;

pub const MIN_PER_CLASS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    /// Heavy-ball momentum coefficient in `[0, 1)`; 0 is plain SGD.
    pub momentum: f64,
    pub seed: Seed,
}

impl SgdConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(invalid(format!("lr = {}, need a finite value >= 0", self.lr)));
        }
        if self.batch == 0 {
            return Err(invalid("batch must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid(format!("momentum = {}, need [0, 1)", self.momentum)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Linear,
    Mlp { hidden: usize },
}

/// Everything needed to build and train one synthetic system at resolution `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub positive: PositiveLaw,
    pub negative: NegativeSpec,
    pub train_per_class: usize,
    pub val_per_class: usize,
    pub model: ModelKind,
}

impl SystemSpec {
    pub fn positive_shape(&self) -> Result<ShapeSpec> {
        self.positive.shape(self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
}

/// A trained model together with its ground-truth geometry and held-out data.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSystem {
    pub spec: SystemSpec,
    pub model: Model,
    pub positive_shape: ShapeSpec,
    pub validation: Dataset,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub epoch_losses: Vec<f64>,
}

pub fn accuracy(model: &impl Classifier, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = (0..data.len()).filter(|&i| model.classify(data.point(i)) == data.y[i]).count();
    hits as f64 / data.len() as f64
}

struct Grad {
    w: Vec<f64>,
    vel: Vec<f64>,
}

/// Minibatch SGD on softmax cross-entropy. Examples are reshuffled every
/// epoch from `cfg.seed`; gradients are batch means.
pub fn train_model(model: &mut Model, data: &Dataset, cfg: &SgdConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.dim != model.input_dim() {
        return Err(AdversarialError::DimensionMismatch { expected: model.input_dim(), got: data.dim });
    }
    if data.is_empty() {
        return Err(invalid("empty training set"));
    }
    let mut rng = cfg.seed.rng();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut state = Grad { w: Vec::new(), vel: Vec::new() };
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch) {
            loss_sum += match model {
                Model::Linear(m) => linear_step(m, data, batch, cfg, &mut state),
                Model::Mlp(m) => mlp_step(m, data, batch, cfg, &mut state),
            };
        }
        let loss = loss_sum / data.len() as f64;
        if !loss.is_finite() {
            return Err(AdversarialError::Diverged { epoch });
        }
        epoch_losses.push(loss);
    }
    Ok(TrainReport { epoch_losses, train_accuracy: accuracy(model, data) })
}

fn apply(params: &mut [&mut f64], grads: &[f64], scale: f64, cfg: &SgdConfig, state: &mut Grad) {
    if state.vel.len() != grads.len() {
        state.vel = vec![0.0; grads.len()];
    }
    for ((p, g), v) in params.iter_mut().zip(grads).zip(state.vel.iter_mut()) {
        *v = cfg.momentum * *v - cfg.lr * g * scale;
        **p += *v;
    }
}

fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    let loss = lse - logits[label];
    let mut d = softmax(logits);
    d[label] -= 1.0;
    (loss, d)
}

fn linear_step(m: &mut LinearModel, data: &Dataset, batch: &[usize], cfg: &SgdConfig, state: &mut Grad) -> f64 {
    let n = m.w().len();
    state.w.clear();
    state.w.resize(n + 1, 0.0);
    let mut loss = 0.0;
    for &i in batch {
        let x = data.point(i);
        let (l, d) = cross_entropy(&[0.0, m.score(x)], data.y[i]);
        loss += l;
        for (g, xi) in state.w.iter_mut().zip(x) {
            *g += d[1] * xi;
        }
        state.w[n] += d[1];
    }
    let grads = std::mem::take(&mut state.w);
    let (w, b) = m.params_mut();
    let mut params: Vec<&mut f64> = w.iter_mut().chain(std::iter::once(b)).collect();
    apply(&mut params, &grads, 1.0 / batch.len() as f64, cfg, state);
    state.w = grads;
    loss
}

fn mlp_step(m: &mut MlpModel, data: &Dataset, batch: &[usize], cfg: &SgdConfig, state: &mut Grad) -> f64 {
    let (n, h, c) = (m.n_in, m.hidden, m.classes);
    let sizes = [h * n, h, c * h, c];
    let total: usize = sizes.iter().sum();
    state.w.clear();
    state.w.resize(total, 0.0);
    let (gw1, rest) = state.w.split_at_mut(h * n);
    let (gb1, rest) = rest.split_at_mut(h);
    let (gw2, gb2) = rest.split_at_mut(c * h);
    let mut loss = 0.0;
    for &i in batch {
        let x = data.point(i);
        let z1 = m.hidden_pre(x);
        let a1: Vec<f64> = z1.iter().map(|z| z.max(0.0)).collect();
        let (l, d2) = cross_entropy(&m.output(&a1), data.y[i]);
        loss += l;
        for k in 0..c {
            gb2[k] += d2[k];
            for j in 0..h {
                gw2[k * h + j] += d2[k] * a1[j];
            }
        }
        for j in 0..h {
            if z1[j] <= 0.0 {
                continue;
            }
            let d1: f64 = (0..c).map(|k| d2[k] * m.w2[k * h + j]).sum();
            gb1[j] += d1;
            for (g, xi) in gw1[j * n..(j + 1) * n].iter_mut().zip(x) {
                *g += d1 * xi;
            }
        }
    }
    let grads = std::mem::take(&mut state.w);
    let mut params: Vec<&mut f64> = m
        .w1
        .iter_mut()
        .chain(m.b1.iter_mut())
        .chain(m.w2.iter_mut())
        .chain(m.b2.iter_mut())
        .collect();
    apply(&mut params, &grads, 1.0 / batch.len() as f64, cfg, state);
    state.w = grads;
    loss
}

/// Samples train and validation sets from the spec's geometry, initialises
/// the model from `cfg.seed`, and trains it.
pub fn train(spec: &SystemSpec, cfg: &SgdConfig) -> Result<SyntheticSystem> {
    if spec.n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if spec.train_per_class < MIN_PER_CLASS || spec.val_per_class < 1 {
        return Err(invalid(format!("need >= {MIN_PER_CLASS} training points per class and a non-empty validation set")));
    }
    spec.negative.validate()?;
    let shape = spec.positive_shape()?;
    let root = cfg.seed;
    let train_set = labelled_sample(&shape, &spec.negative, spec.train_per_class, root.substream(10))?;
    let validation = labelled_sample(&shape, &spec.negative, spec.val_per_class, root.substream(11))?;
    let mut model = match spec.model {
        ModelKind::Linear => Model::Linear(LinearModel::random(spec.n, root.substream(12))?),
        ModelKind::Mlp { hidden } => Model::Mlp(MlpModel::random(spec.n, hidden, 2, root.substream(12))?),
    };
    let sgd = SgdConfig { seed: root.substream(13), ..*cfg };
    let report = train_model(&mut model, &train_set, &sgd)?;
    let val_accuracy = accuracy(&model, &validation);
    Ok(SyntheticSystem {
        spec: *spec,
        model,
        positive_shape: shape,
        validation,
        train_accuracy: report.train_accuracy,
        val_accuracy,
        epoch_losses: report.epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sgd(lr: f64, epochs: usize, seed: u64) -> SgdConfig {
        SgdConfig { lr, epochs, batch: 16, momentum: 0.9, seed: Seed::new(seed) }
    }

    #[test]
    fn separable_blobs_linear() {
        let train_set = Dataset::gaussian_blobs(5, 300, 8.0, Seed::new(1));
        let val = Dataset::gaussian_blobs(5, 300, 8.0, Seed::new(2));
        let mut model = Model::Linear(LinearModel::random(5, Seed::new(3)).unwrap());
        train_model(&mut model, &train_set, &sgd(0.05, 20, 4)).unwrap();
        assert!(accuracy(&model, &val) >= 0.99);
    }

    #[test]
    fn ball_vs_shell_mlp_in_the_plane() {
        let spec = SystemSpec {
            n: 2,
            positive: PositiveLaw::ConstantBall { radius: 1.0 },
            negative: NegativeSpec::Shell { inner: 1.0, outer: 1.5 },
            train_per_class: 1000,
            val_per_class: 500,
            model: ModelKind::Mlp { hidden: 32 },
        };
        let sys = train(&spec, &sgd(0.05, 60, 5)).unwrap();
        assert!(sys.val_accuracy >= 0.95, "{}", sys.val_accuracy);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let data = Dataset::gaussian_blobs(3, 200, 2.0, Seed::new(6));
        let model0 = Model::Mlp(MlpModel::random(3, 8, 2, Seed::new(7)).unwrap());
        let mut model = model0.clone();
        let report = train_model(&mut model, &data, &sgd(0.0, 3, 8)).unwrap();
        assert_eq!(model, model0);
        assert_eq!(report.train_accuracy, accuracy(&model0, &data));
    }

    #[test]
    fn divergence_is_reported() {
        let mut data = Dataset::gaussian_blobs(3, 200, 2.0, Seed::new(9));
        for v in data.x.iter_mut() {
            *v *= 1e200;
        }
        let mut model = Model::Linear(LinearModel::random(3, Seed::new(10)).unwrap());
        let err = train_model(&mut model, &data, &sgd(1e10, 3, 11)).unwrap_err();
        assert!(matches!(err, AdversarialError::Diverged { epoch: 0 }));
    }
}

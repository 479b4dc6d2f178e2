use rand::Rng;
use rand_distr::StandardNormal;

use super::models::{check_dim, Classifier, LinearModel, ShapeClassifier};
use super::{dot, invalid, norm, AdversarialError, Result};
use crate::geometry::{ShapeKind, SurfaceDistance};
use crate::seed::Seed;

/// Safety factor applied to analytic flip distances so the endpoint lands
/// strictly on the other side.
const FLIP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub p: Vec<f64>,
    /// `‖p‖`, recomputed from `p`.
    pub norm: f64,
    /// The class at `x + p`, re-evaluated, differs from the class at `x`.
    pub flipped: bool,
    /// `x` already sits on the decision boundary.
    pub borderline: bool,
    pub evaluations: usize,
}

impl PerturbationResult {
    fn certify(model: &impl Classifier, x: &[f64], p: Vec<f64>, evaluations: usize) -> Self {
        let y: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let flipped = model.classify(&y) != model.classify(x);
        Self { norm: norm(&p), p, flipped, borderline: false, evaluations: evaluations + 2 }
    }
}

/// Closest point on the hyperplane `w . x + b = 0`, pushed a relative
/// `1e-10` past it.
pub fn min_perturbation_linear(model: &LinearModel, x: &[f64]) -> Result<PerturbationResult> {
    check_dim(model, x)?;
    let s = model.score(x);
    let w = model.w();
    if s == 0.0 {
        return Ok(PerturbationResult {
            p: vec![0.0; x.len()],
            norm: 0.0,
            flipped: false,
            borderline: true,
            evaluations: 1,
        });
    }
    let c = -(s / dot(w, w)) * (1.0 + FLIP_SLACK);
    let p = w.iter().map(|wi| c * wi).collect();
    Ok(PerturbationResult::certify(model, x, p, 1))
}

/// Minimal flip for exact shape membership. Exact for balls and boxes; for
/// ellipsoids the radial step to the boundary is returned, which is an
/// upper bound.
pub fn min_perturbation_exact(model: &ShapeClassifier, x: &[f64]) -> Result<PerturbationResult> {
    check_dim(model, x)?;
    let shape = &model.shape;
    let inside = matches!(shape.distance_to_surface(x)?, SurfaceDistance::Inside(_));
    let grow = 1.0 + FLIP_SLACK;
    let mut p = vec![0.0; x.len()];
    match shape.kind() {
        ShapeKind::Ball => {
            let r = shape.radius();
            let len = norm(x);
            if len == 0.0 {
                p[0] = r * grow;
            } else {
                // inside: push out to R(1+eps); outside: pull in to R(1-eps)
                let target = if inside { r * grow } else { r * (1.0 - FLIP_SLACK) };
                let c = target / len - 1.0;
                p.iter_mut().zip(x).for_each(|(pi, xi)| *pi = c * xi);
            }
        }
        ShapeKind::Box => {
            let h = shape.sizes();
            if inside {
                let (i, _) = h
                    .iter()
                    .zip(x)
                    .map(|(hi, xi)| hi - xi.abs())
                    .enumerate()
                    .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
                let sign = if x[i] < 0.0 { -1.0 } else { 1.0 };
                p[i] = sign * h[i] * grow - x[i];
            } else {
                for ((pi, xi), hi) in p.iter_mut().zip(x).zip(h) {
                    *pi = xi.clamp(-hi, *hi) - xi;
                }
            }
        }
        ShapeKind::Ellipsoid => {
            let q = x.iter().zip(shape.sizes()).map(|(v, a)| (v / a) * (v / a)).sum::<f64>().sqrt();
            if q == 0.0 {
                let a_min = shape.sizes().iter().copied().fold(f64::INFINITY, f64::min);
                let i = shape.sizes().iter().position(|a| *a == a_min).unwrap_or(0);
                p[i] = a_min * grow;
            } else {
                let target = if inside { grow } else { 1.0 - FLIP_SLACK };
                let c = target / q - 1.0;
                p.iter_mut().zip(x).for_each(|(pi, xi)| *pi = c * xi);
            }
        }
    }
    Ok(PerturbationResult::certify(model, x, p, 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Relative bisection tolerance, in `[1e-6, 1e-2]`.
    pub tol: f64,
    /// Give up if no flip is found within this radius.
    pub max_radius: f64,
    pub refine_rounds: usize,
    pub seed: Seed,
}

impl SearchConfig {
    pub fn new(tol: f64, max_radius: f64, seed: Seed) -> Self {
        Self { tol, max_radius, refine_rounds: 50, seed }
    }
}

struct Probe<'a, M> {
    model: &'a M,
    x: &'a [f64],
    class: usize,
    evals: usize,
    buf: Vec<f64>,
}

impl<M: Classifier> Probe<'_, M> {
    fn flips(&mut self, dir: &[f64], r: f64) -> bool {
        self.evals += 1;
        for ((b, xi), di) in self.buf.iter_mut().zip(self.x).zip(dir) {
            *b = xi + r * di;
        }
        self.model.classify(&self.buf) != self.class
    }

    /// Shrinks `[lo, hi]` (class kept at `lo`, flipped at `hi`) to relative
    /// width `tol`.
    fn bisect(&mut self, dir: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        while hi - lo > tol * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.flips(dir, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Gradient of `logit_other - logit_class` at `y`.
    fn margin_gradient(&mut self, y: &[f64], other: usize) -> Vec<f64> {
        self.evals += 1;
        let mut weights = vec![0.0; self.model.n_classes()];
        weights[other] += 1.0;
        weights[self.class] -= 1.0;
        self.model.input_gradient(y, &weights)
    }
}

fn unit(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let len = norm(&v);
    if !(len > 0.0 && len.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= len);
    Some(v)
}

fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = unit(v) {
            return u;
        }
    }
}

/// Upper bound on the smallest L2 perturbation that changes the model's
/// decision at `x`.
///
/// Starts along the gradient toward the runner-up class, brackets the flip
/// radius by doubling from the linearised estimate, bisects, then tries up
/// to `refine_rounds` alternative directions (the local boundary normal and
/// random orthogonal nudges), keeping any that flip at a smaller radius.
pub fn min_perturbation_search(model: &impl Classifier, x: &[f64], cfg: &SearchConfig) -> Result<PerturbationResult> {
    check_dim(model, x)?;
    if !(1e-6..=1e-2).contains(&cfg.tol) {
        return Err(invalid(format!("tol = {}, need [1e-6, 1e-2]", cfg.tol)));
    }
    if !(cfg.max_radius > 0.0 && cfg.max_radius.is_finite()) {
        return Err(invalid(format!("max_radius = {}, need a positive finite value", cfg.max_radius)));
    }
    let logits = model.logits(x);
    let class = super::models::argmax(&logits);
    let runner_up = (0..logits.len())
        .filter(|&c| c != class)
        .fold(None, |best: Option<usize>, c| match best {
            Some(b) if logits[b] >= logits[c] => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| invalid("model has a single class"))?;
    let margin = logits[class] - logits[runner_up];
    if margin == 0.0 {
        return Err(AdversarialError::ZeroMargin);
    }
    let n = x.len();
    let mut rng = cfg.seed.rng();
    let mut probe = Probe { model, x, class, evals: 1, buf: vec![0.0; n] };

    let g = probe.margin_gradient(x, runner_up);
    let g_norm = norm(&g);
    let mut dir = unit(g).unwrap_or_else(|| random_unit(&mut rng, n));
    let guess = if g_norm > 0.0 { margin / g_norm } else { cfg.max_radius / 1024.0 };
    let mut hi = guess.clamp(cfg.max_radius * 1e-12, cfg.max_radius);

    let mut lo;
    if probe.flips(&dir, hi) {
        lo = 0.0;
    } else {
        loop {
            lo = hi;
            if hi >= cfg.max_radius {
                return Err(AdversarialError::NoFlipWithinBudget { radius: cfg.max_radius });
            }
            hi = (2.0 * hi).min(cfg.max_radius);
            if probe.flips(&dir, hi) {
                break;
            }
        }
    }
    let mut best = probe.bisect(&dir, lo, hi, cfg.tol);

    let mut sigma = 0.5;
    for round in 0..cfg.refine_rounds {
        let candidate = if round % 2 == 0 {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + best * d).collect();
            let other = model.classify(&y);
            let other = if other == class { runner_up } else { other };
            unit(probe.margin_gradient(&y, other))
        } else {
            let mut u = random_unit(&mut rng, n);
            let along = dot(&u, &dir);
            u.iter_mut().zip(&dir).for_each(|(ui, di)| *ui -= along * di);
            unit(u).and_then(|u| unit(dir.iter().zip(&u).map(|(d, ui)| d + sigma * ui).collect()))
        };
        let Some(cand) = candidate else { continue };
        if cand == dir {
            continue;
        }
        let limit = best * (1.0 - cfg.tol);
        if probe.flips(&cand, limit) {
            best = probe.bisect(&cand, 0.0, limit, cfg.tol);
            dir = cand;
        } else if round % 2 == 1 {
            sigma *= 0.5;
        }
    }

    let p: Vec<f64> = dir.iter().map(|d| best * d).collect();
    let result = PerturbationResult::certify(model, x, p, probe.evals);
    debug_assert!(result.flipped);
    Ok(result)
}

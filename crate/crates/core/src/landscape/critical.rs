use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use super::{binomial, out_of_range, sample_random_polynomial, LandscapeError, MultiPoly, Result};
use crate::seed::Seed;

const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 30;
pub const DEDUP_RADIUS: f64 = 1e-6;
pub const CENSUS_HALF_WIDTH: f64 = 5.0;
pub const CENSUS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub gradient_norm: f64,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Fraction of negative Hessian eigenvalues.
    pub index: f64,
    /// Some eigenvalue is zero relative to the spectrum's scale.
    pub degenerate: bool,
}

impl CriticalPoint {
    pub fn kind(&self) -> PointKind {
        if self.degenerate {
            PointKind::Degenerate
        } else if self.index == 0.0 {
            PointKind::Minimum
        } else if self.index == 1.0 {
            PointKind::Maximum
        } else {
            PointKind::Saddle
        }
    }
}

/// Outcome of a multistart search. `failed` counts starts that neither
/// converged nor left the search region.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    pub starts: usize,
    pub converged: usize,
    pub escaped: usize,
    pub failed: usize,
}

impl CriticalSearch {
    pub fn nonconvergence_fraction(&self) -> f64 {
        self.failed as f64 / self.starts as f64
    }

    pub fn count(&self, kind: PointKind) -> usize {
        self.points.iter().filter(|p| p.kind() == kind).count()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

enum Outcome {
    Converged(Vec<f64>, f64),
    Escaped,
    Failed,
}

fn newton_step(g: &[f64], h: &[f64]) -> Vec<f64> {
    let n = g.len();
    let hm = DMatrix::from_row_slice(n, n, h);
    let rhs = -DVector::from_column_slice(g);
    if let Some(s) = hm.clone().lu().solve(&rhs) {
        if s.iter().all(|v| v.is_finite()) {
            return s.as_slice().to_vec();
        }
    }
    match hm.svd(true, true).solve(&rhs, 1e-12) {
        Ok(s) => s.as_slice().to_vec(),
        Err(_) => rhs.as_slice().to_vec(),
    }
}

/// Backtracking along `dir` until `||grad p||` drops below `gn`.
fn line_search(poly: &MultiPoly, x: &[f64], dir: &[f64], gn: f64) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let y: Vec<f64> = x.iter().zip(dir).map(|(a, s)| a + t * s).collect();
        let gy = poly.gradient(&y);
        let gyn = norm(&gy);
        if gyn < gn {
            return Some((y, gy, gyn));
        }
        t *= 0.5;
    }
    None
}

/// Newton on `grad p = 0`, damped by halving the step until `||grad p||`
/// drops. A start that stalls at a nonzero local minimum of `||grad p||`
/// is reported as failed.
fn newton(poly: &MultiPoly, start: Vec<f64>, tol: f64, escape: f64) -> Outcome {
    let mut x = start;
    let mut g = poly.gradient(&x);
    let mut gn = norm(&g);
    for _ in 0..MAX_NEWTON_ITERS {
        if gn <= tol {
            return Outcome::Converged(x, gn);
        }
        let (_, h) = poly.gradient_hessian(&x);
        let step = newton_step(&g, &h);
        let next = line_search(poly, &x, &step, gn);
        match next {
            Some((y, gy, gyn)) => {
                x = y;
                g = gy;
                gn = gyn;
            }
            None => break,
        }
        if x.iter().any(|v| v.abs() > escape) {
            return Outcome::Escaped;
        }
    }
    if gn <= tol {
        Outcome::Converged(x, gn)
    } else {
        Outcome::Failed
    }
}

fn classify(poly: &MultiPoly, location: Vec<f64>, gradient_norm: f64) -> CriticalPoint {
    let n = poly.n_vars();
    let (_, h) = poly.gradient_hessian(&location);
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &h));
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let scale = ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let degenerate = ev.iter().any(|v| v.abs() <= 1e-9 * scale);
    let negative = ev.iter().filter(|v| **v < 0.0).count();
    CriticalPoint {
        location,
        gradient_norm,
        hessian_eigenvalues: ev,
        index: negative as f64 / n as f64,
        degenerate,
    }
}

/// Multistart damped Newton on `grad p = 0` from uniform starts in
/// `[-box_half_width, box_half_width]^n`.
///
/// Uses `max(starts, 10 * C(n+d, d))` starts. Converged points outside the
/// closed box are dropped and points within [`DEDUP_RADIUS`] of an earlier
/// one are merged; the order follows the starts.
pub fn find_critical_points(poly: &MultiPoly, box_half_width: f64, starts: usize, tol: f64, seed: Seed) -> Result<CriticalSearch> {
    if starts < 100 {
        return Err(out_of_range("starts", starts as f64, ">= 100"));
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(out_of_range("tol", tol, "[1e-12, 1e-6]"));
    }
    if !(box_half_width.is_finite() && box_half_width > 0.0) {
        return Err(out_of_range("box_half_width", box_half_width, "(0, inf)"));
    }
    let n = poly.n_vars();
    let floor = 10 * binomial((n as u32 + poly.degree()) as u64, poly.degree() as u64) as usize;
    let starts = starts.max(floor);
    let mut rng = seed.rng();
    let initial: Vec<Vec<f64>> = (0..starts)
        .map(|_| (0..n).map(|_| rng.random_range(-box_half_width..=box_half_width)).collect())
        .collect();
    let outcomes: Vec<Outcome> = initial
        .into_par_iter()
        .map(|x0| newton(poly, x0, tol, 4.0 * box_half_width))
        .collect();

    let mut search = CriticalSearch { points: Vec::new(), starts, converged: 0, escaped: 0, failed: 0 };
    for o in outcomes {
        match o {
            Outcome::Converged(x, gn) => {
                search.converged += 1;
                if x.iter().any(|v| v.abs() > box_half_width) {
                    continue;
                }
                let dup = search.points.iter().any(|p| {
                    p.location.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= DEDUP_RADIUS
                });
                if !dup {
                    search.points.push(classify(poly, x, gn));
                }
            }
            Outcome::Escaped => search.escaped += 1,
            Outcome::Failed => search.failed += 1,
        }
    }
    Ok(search)
}

/// `sqrt(2) (d - 1)^((n + 1) / 2)`.
pub fn critical_point_bound(n_vars: usize, degree: u32) -> f64 {
    2f64.sqrt() * ((degree - 1) as f64).powf((n_vars as f64 + 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusResult {
    pub n_vars: usize,
    pub degree: u32,
    pub trials: usize,
    pub mean_critical_points: f64,
    pub critical_stderr: f64,
    pub mean_minima: f64,
    pub minima_stderr: f64,
    pub mean_degenerate: f64,
    /// Minima over non-degenerate critical points, pooled across trials.
    pub minima_fraction: f64,
    /// Delta-method standard error of the pooled ratio.
    pub minima_fraction_stderr: f64,
    pub nonconvergence_fraction: f64,
    pub bound_c: f64,
    pub bound_note: String,
    /// `mean_critical_points <= bound_c + 2 * critical_stderr`.
    pub within_bound: bool,
}

/// Critical-point census over `trials` Kostlan polynomials in the box of
/// half-width [`CENSUS_HALF_WIDTH`].
pub fn census(n_vars: usize, degree: u32, trials: usize, seed: Seed) -> Result<CensusResult> {
    if trials < 50 {
        return Err(out_of_range("trials", trials as f64, ">= 50"));
    }
    let per_trial: Vec<(f64, f64, f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.substream(i);
            let poly = sample_random_polynomial(n_vars, degree, s.substream(0))?;
            let found = find_critical_points(&poly, CENSUS_HALF_WIDTH, 100, CENSUS_TOL, s.substream(1))?;
            let degenerate = found.count(PointKind::Degenerate) as f64;
            Ok((
                found.points.len() as f64,
                found.count(PointKind::Minimum) as f64,
                degenerate,
                found.points.len() as f64 - degenerate,
                found.nonconvergence_fraction(),
            ))
        })
        .collect::<std::result::Result<_, LandscapeError>>()?;

    let col = |f: fn(&(f64, f64, f64, f64, f64)) -> f64| -> Vec<f64> { per_trial.iter().map(f).collect() };
    let (crit, mins, degen, nondeg, nonconv) = (col(|t| t.0), col(|t| t.1), col(|t| t.2), col(|t| t.3), col(|t| t.4));
    let (mean_c, se_c) = crate::stats::mean_stderr(&crit).unwrap_or((0.0, 0.0));
    let (mean_m, se_m) = crate::stats::mean_stderr(&mins).unwrap_or((0.0, 0.0));
    let mean_nd = crate::stats::pairwise_sum(&nondeg) / trials as f64;
    let (fraction, fraction_se) = if mean_nd > 0.0 {
        let r = mean_m / mean_nd;
        let resid: Vec<f64> = mins.iter().zip(&nondeg).map(|(m, c)| m - r * c).collect();
        let se = crate::stats::mean_stderr(&resid).map_or(0.0, |(_, se)| se) / mean_nd;
        (r, se)
    } else {
        (0.0, 0.0)
    };
    let bound_c = critical_point_bound(n_vars, degree);
    Ok(CensusResult {
        n_vars,
        degree,
        trials,
        mean_critical_points: mean_c,
        critical_stderr: se_c,
        mean_minima: mean_m,
        minima_stderr: se_m,
        mean_degenerate: crate::stats::pairwise_sum(&degen) / trials as f64,
        minima_fraction: fraction,
        minima_fraction_stderr: fraction_se,
        nonconvergence_fraction: crate::stats::pairwise_sum(&nonconv) / trials as f64,
        bound_c,
        bound_note: format!(
            "counts critical points in [-{h}, {h}]^{n_vars}; the bound sqrt(2)(d-1)^((n+1)/2) = {bound_c:.4} covers all of R^{n_vars}",
            h = CENSUS_HALF_WIDTH
        ),
        within_bound: mean_c <= bound_c + 2.0 * se_c,
    })
}

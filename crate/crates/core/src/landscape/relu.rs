use nalgebra::{DMatrix, DVector};

use super::{out_of_range, LandscapeError, Result};

const EXCHANGE_GRID: usize = 20_000;
const MAX_EXCHANGES: usize = 100;
const CHECK_GRID: usize = 100_000;

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// `max(x, y) = ReLU(x - y) + y`.
pub fn max_via_relu(x: f64, y: f64) -> f64 {
    relu(x - y) + y
}

/// `ReLU(x-y) + ReLU(x-y) y / |x-y| + ReLU(y-x) + ReLU(y-x) x / |x-y|`,
/// which divides by zero on the diagonal.
pub fn max_switched_form(x: f64, y: f64) -> Option<f64> {
    let d = (x - y).abs();
    if d == 0.0 {
        return None;
    }
    Some(relu(x - y) + relu(x - y) / d * y + relu(y - x) + relu(y - x) / d * x)
}

/// `ReLU(x) ~ (x + q(x)) / 2` with `q` the best uniform approximation of
/// `|x|` on `[-1, 1]` among polynomials of degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluApprox {
    pub degree: usize,
    /// Chebyshev coefficients `a_j` of `sum a_j T_j(x)`.
    pub chebyshev: Vec<f64>,
    /// Levelled error of `q` against `|x|`.
    pub abs_error: f64,
    /// Max of `|ReLU(x) - approx(x)|` on a uniform 10^5-point grid of `[-1, 1]`.
    pub sup_error: f64,
}

fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

impl ReluApprox {
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.chebyshev, x)
    }

    /// Power-basis coefficients, constant term first.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        let n = self.chebyshev.len();
        let mut out = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        prev[0] = 1.0;
        if n > 1 {
            cur[1] = 1.0;
        }
        for (j, &a) in self.chebyshev.iter().enumerate() {
            let t = match j {
                0 => &prev,
                1 => &cur,
                _ => {
                    let mut next = vec![0.0; n];
                    for i in 0..n - 1 {
                        next[i + 1] += 2.0 * cur[i];
                    }
                    for i in 0..n {
                        next[i] -= prev[i];
                    }
                    prev = std::mem::replace(&mut cur, next);
                    &cur
                }
            };
            for i in 0..n {
                out[i] += a * t[i];
            }
        }
        out
    }
}

/// Best uniform approximation of `sqrt(u)` on `[0, 1]` by a degree-`k`
/// polynomial, as Chebyshev coefficients in `2u - 1`, plus the levelled error.
///
/// Remez exchange: solve for the polynomial that alternates with equal
/// magnitude on a `k + 2` point reference, move the reference to the extrema
/// of the new error curve, repeat until the levelled error matches the true
/// maximum error.
fn remez_sqrt(k: usize) -> Result<(Vec<f64>, f64)> {
    let m = k + 2;
    let err_at = |c: &[f64], u: f64| u.sqrt() - clenshaw(c, 2.0 * u - 1.0);
    let mut reference: Vec<f64> = (0..m)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos()))
        .collect();
    // u = s^2 resolves the square-root cusp at 0
    let grid: Vec<f64> = (0..=EXCHANGE_GRID).map(|i| (i as f64 / EXCHANGE_GRID as f64).powi(2)).collect();
    let mut best = (vec![0.5], 0.5);
    for _ in 0..MAX_EXCHANGES {
        let mut a = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for (j, &u) in reference.iter().enumerate() {
            let s = 2.0 * u - 1.0;
            let (mut t0, mut t1) = (1.0, s);
            for i in 0..=k {
                a[(j, i)] = t0;
                let t2 = 2.0 * s * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            a[(j, k + 1)] = if j % 2 == 0 { 1.0 } else { -1.0 };
            rhs[j] = u.sqrt();
        }
        let sol = a.lu().solve(&rhs).ok_or(LandscapeError::ExchangeFailed)?;
        let c: Vec<f64> = sol.iter().take(k + 1).copied().collect();
        let level = sol[k + 1].abs();

        // one extremum per run of constant error sign
        let errs: Vec<f64> = grid.iter().map(|&u| err_at(&c, u)).collect();
        let mut peaks: Vec<(f64, f64)> = Vec::new();
        let mut run_best = 0usize;
        for i in 1..=grid.len() {
            let boundary = i == grid.len() || (errs[i] >= 0.0) != (errs[run_best] >= 0.0);
            if boundary {
                peaks.push(refine(&c, &grid, run_best, &err_at));
                if i < grid.len() {
                    run_best = i;
                }
            } else if errs[i].abs() > errs[run_best].abs() {
                run_best = i;
            }
        }
        if peaks.len() < m {
            return Err(LandscapeError::ExchangeFailed);
        }
        while peaks.len() > m {
            if peaks[0].1.abs() < peaks[peaks.len() - 1].1.abs() {
                peaks.remove(0);
            } else {
                peaks.pop();
            }
        }
        let max_err = peaks.iter().fold(0.0f64, |acc, p| acc.max(p.1.abs()));
        best = (c, max_err);
        reference = peaks.iter().map(|p| p.0).collect();
        if max_err - level <= 1e-13 * max_err {
            break;
        }
    }
    Ok(best)
}

/// Golden-section polish of the grid extremum at index `i`.
fn refine(c: &[f64], grid: &[f64], i: usize, err_at: &impl Fn(&[f64], f64) -> f64) -> (f64, f64) {
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let f = |u: f64| err_at(c, u).abs();
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) >= f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let mid = 0.5 * (a + b);
    let cand = [grid[i], mid];
    let u = if f(mid) > f(grid[i]) { cand[1] } else { cand[0] };
    (u, err_at(c, u))
}

/// Best-uniform polynomial ReLU on `[-1, 1]` of the given degree.
///
/// `|x|` is even, so its best approximation is `p(x^2)` where `p` is the best
/// approximation of `sqrt(u)` on `[0, 1]` of degree `degree / 2`, with the same
/// error. `T_i(2x^2 - 1) = T_{2i}(x)` turns `p` into Chebyshev form in `x`.
pub fn relu_poly_approx(degree: usize) -> Result<ReluApprox> {
    if degree == 0 {
        return Err(out_of_range("degree", 0.0, ">= 1"));
    }
    let (c, abs_error) = remez_sqrt(degree / 2)?;
    let mut chebyshev = vec![0.0; degree + 1];
    for (i, ci) in c.iter().enumerate() {
        chebyshev[2 * i] = 0.5 * ci;
    }
    chebyshev[1] += 0.5;
    let mut approx = ReluApprox { degree, chebyshev, abs_error, sup_error: 0.0 };
    approx.sup_error = (0..=CHECK_GRID)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / CHECK_GRID as f64;
            (relu(x) - approx.eval(x)).abs()
        })
        .fold(0.0, f64::max);
    Ok(approx)
}

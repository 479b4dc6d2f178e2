//! Dense multivariate polynomials, a multistart Newton census of their
//! critical points, and best uniform polynomial approximations of ReLU.

mod critical;
mod relu;

pub use critical::{
    census, critical_point_bound, find_critical_points, CensusResult, CriticalPoint, CriticalSearch, PointKind, CENSUS_HALF_WIDTH,
    CENSUS_TOL, DEDUP_RADIUS,
};
pub use relu::{max_switched_form, max_via_relu, relu, relu_poly_approx, ReluApprox};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LandscapeError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("term has {got} exponents, polynomial has {expected} variables")]
    TermArity { expected: usize, got: usize },
    #[error("point has dimension {got}, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the exchange iteration did not produce an alternating reference")]
    ExchangeFailed,
}

pub type Result<T> = std::result::Result<T, LandscapeError>;

pub(crate) fn out_of_range(name: &'static str, value: f64, range: &'static str) -> LandscapeError {
    LandscapeError::OutOfRange { name, value, range }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `d! / (e0! e1! ... en!)` with `e0 = d - |e|`.
pub fn kostlan_variance(degree: u32, exps: &[u32]) -> f64 {
    let total: u32 = exps.iter().sum();
    let mut v = factorial(degree) / factorial(degree - total);
    for &e in exps {
        v /= factorial(e);
    }
    v
}

/// A polynomial of total degree at most `degree` in `n_vars` variables, with
/// one coefficient per monomial in graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    n_vars: usize,
    degree: u32,
    exps: Vec<Vec<u32>>,
    coeffs: Vec<f64>,
}

/// Exponent tuples of total degree `0, 1, ..., degree`, each degree block in
/// descending lexicographic order.
fn monomials(n_vars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(var: usize, left: u32, cur: &mut [u32], out: &mut Vec<Vec<u32>>) {
        if var + 1 == cur.len() {
            cur[var] = left;
            out.push(cur.to_vec());
            return;
        }
        for e in (0..=left).rev() {
            cur[var] = e;
            rec(var + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n_vars];
    for d in 0..=degree {
        rec(0, d, &mut cur, &mut out);
    }
    out
}

impl MultiPoly {
    pub fn zero(n_vars: usize, degree: u32) -> Result<Self> {
        if n_vars == 0 {
            return Err(out_of_range("n_vars", 0.0, ">= 1"));
        }
        if degree < 2 {
            return Err(out_of_range("degree", degree as f64, ">= 2"));
        }
        let exps = monomials(n_vars, degree);
        let coeffs = vec![0.0; exps.len()];
        Ok(Self { n_vars, degree, exps, coeffs })
    }

    /// Builds `sum c * x^e` from `(e, c)` pairs; repeated monomials add up.
    pub fn from_terms(n_vars: usize, degree: u32, terms: &[(&[u32], f64)]) -> Result<Self> {
        let mut p = Self::zero(n_vars, degree)?;
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(LandscapeError::TermArity { expected: n_vars, got: e.len() });
            }
            let i = p
                .exps
                .iter()
                .position(|m| m.as_slice() == *e)
                .ok_or_else(|| out_of_range("term degree", e.iter().sum::<u32>() as f64, "<= polynomial degree"))?;
            p.coeffs[i] += c;
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(self.degree as usize + 1);
                let mut acc = 1.0;
                for _ in 0..=self.degree {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let pw = self.powers(x);
        self.exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c * e.iter().enumerate().map(|(i, &k)| pw[i][k as usize]).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.derivatives(x, false).0
    }

    /// Gradient and row-major Hessian, by exact differentiation of each
    /// monomial.
    pub fn gradient_hessian(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.derivatives(x, true)
    }

    fn derivatives(&self, x: &[f64], with_hessian: bool) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_vars;
        let pw = self.powers(x);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; if with_hessian { n * n } else { 0 }];
        let (mut base, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let rest = |base: &[f64], skip: &[usize]| -> f64 {
            base.iter()
                .enumerate()
                .filter(|(i, _)| !skip.contains(i))
                .map(|(_, b)| b)
                .product()
        };
        for (e, &c) in self.exps.iter().zip(&self.coeffs) {
            if c == 0.0 || e.iter().all(|&k| k == 0) {
                continue;
            }
            for i in 0..n {
                let k = e[i] as usize;
                let kf = k as f64;
                base[i] = pw[i][k];
                d1[i] = if k >= 1 { kf * pw[i][k - 1] } else { 0.0 };
                d2[i] = if k >= 2 { kf * (kf - 1.0) * pw[i][k - 2] } else { 0.0 };
            }
            for j in 0..n {
                if e[j] == 0 {
                    continue;
                }
                g[j] += c * d1[j] * rest(&base, &[j]);
                if !with_hessian {
                    continue;
                }
                if e[j] >= 2 {
                    h[j * n + j] += c * d2[j] * rest(&base, &[j]);
                }
                for k in j + 1..n {
                    if e[k] == 0 {
                        continue;
                    }
                    let v = c * d1[j] * d1[k] * rest(&base, &[j, k]);
                    h[j * n + k] += v;
                    h[k * n + j] += v;
                }
            }
        }
        (g, h)
    }
}

/// A Kostlan random polynomial: independent Gaussian coefficients with
/// variance `d! / (e0! e1! ... en!)`.
pub fn sample_random_polynomial(n_vars: usize, degree: u32, seed: Seed) -> Result<MultiPoly> {
    if !(1..=4).contains(&n_vars) {
        return Err(out_of_range("n_vars", n_vars as f64, "[1, 4]"));
    }
    if !(2..=6).contains(&degree) {
        return Err(out_of_range("degree", degree as f64, "[2, 6]"));
    }
    let mut p = MultiPoly::zero(n_vars, degree)?;
    let mut rng = seed.rng();
    for (e, c) in p.exps.iter().zip(p.coeffs.iter_mut()) {
        let z: f64 = rng.sample(StandardNormal);
        *c = kostlan_variance(degree, e).sqrt() * z;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_table_size() {
        for n in 1..=4 {
            for d in 2..=6u32 {
                let p = MultiPoly::zero(n, d).unwrap();
                assert_eq!(p.coefficients().len() as u64, binomial(n as u64 + d as u64, d as u64));
                let mut seen = p.exponents().to_vec();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), p.exponents().len());
            }
        }
    }

    #[test]
    fn kostlan_weights() {
        assert_eq!(kostlan_variance(2, &[1, 1]), 2.0);
        assert_eq!(kostlan_variance(2, &[2, 0]), 1.0);
        assert_eq!(kostlan_variance(2, &[0, 0]), 1.0);
        assert_eq!(kostlan_variance(4, &[1, 0, 0]), 4.0);
    }

    #[test]
    fn derivatives_match_hand_algebra() {
        // p = x^3 y - 2 x y^2 + 5 y + 1
        let p = MultiPoly::from_terms(2, 4, &[(&[3, 1], 1.0), (&[1, 2], -2.0), (&[0, 1], 5.0), (&[0, 0], 1.0)]).unwrap();
        let (x, y) = (1.3, -0.7);
        assert!((p.eval(&[x, y]) - (x * x * x * y - 2.0 * x * y * y + 5.0 * y + 1.0)).abs() < 1e-12);
        let (g, h) = p.gradient_hessian(&[x, y]);
        assert!((g[0] - (3.0 * x * x * y - 2.0 * y * y)).abs() < 1e-12);
        assert!((g[1] - (x * x * x - 4.0 * x * y + 5.0)).abs() < 1e-12);
        assert!((h[0] - 6.0 * x * y).abs() < 1e-12);
        assert!((h[1] - (3.0 * x * x - 4.0 * y)).abs() < 1e-12);
        assert_eq!(h[1], h[2]);
        assert!((h[3] + 4.0 * x).abs() < 1e-12);
    }

    #[test]
    fn sampling_bounds() {
        assert!(sample_random_polynomial(0, 3, Seed::new(0)).is_err());
        assert!(sample_random_polynomial(5, 3, Seed::new(0)).is_err());
        assert!(sample_random_polynomial(2, 1, Seed::new(0)).is_err());
        assert!(sample_random_polynomial(2, 7, Seed::new(0)).is_err());
        let a = sample_random_polynomial(3, 4, Seed::new(9)).unwrap();
        assert_eq!(a, sample_random_polynomial(3, 4, Seed::new(9)).unwrap());
    }
}

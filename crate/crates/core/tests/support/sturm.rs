#![allow(dead_code)]

//! Exact real-root counting over the rationals, shared by test targets.

use hdg_core::landscape::MultiPoly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Poly = Vec<BigRational>;

pub fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn derivative(p: &Poly) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
}

pub fn remainder(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let lead = b.last().unwrap();
    while r.len() >= b.len() {
        let q = r.last().unwrap() / lead;
        let shift = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &q * c;
        }
        r.pop();
        r = trim(r);
    }
    r
}

pub fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Distinct real roots of `p` in `(a, b]` by Sturm's theorem.
pub fn sturm_count(p: &Poly, a: f64, b: f64) -> usize {
    let mut seq = vec![p.clone(), derivative(p)];
    while seq.last().is_some_and(|q| !q.is_empty()) {
        let n = seq.len();
        let r: Poly = remainder(&seq[n - 2], &seq[n - 1]).into_iter().map(|c| -c).collect();
        seq.push(r);
    }
    seq.pop();
    let changes = |x: f64| {
        let x = BigRational::from_float(x).unwrap();
        let signs: Vec<bool> = seq.iter().map(|q| eval(q, &x)).filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(a) - changes(b)
}

pub fn univariate(p: &MultiPoly) -> Poly {
    let mut c = vec![BigRational::zero(); p.degree() as usize + 1];
    for (e, v) in p.exponents().iter().zip(p.coefficients()) {
        c[e[0] as usize] += BigRational::from_float(*v).unwrap();
    }
    trim(c)
}

pub fn integer_poly(coeffs: &[i64]) -> Poly {
    coeffs.iter().map(|v| BigRational::from_integer(BigInt::from(*v))).collect()
}

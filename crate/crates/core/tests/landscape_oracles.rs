use hdg_core::landscape::{
    find_critical_points, relu, relu_poly_approx, sample_random_polynomial, CENSUS_HALF_WIDTH, CENSUS_TOL, DEDUP_RADIUS,
};
use hdg_core::Seed;
use proptest::prelude::*;

#[path = "support/sturm.rs"]
mod sturm;

use sturm::{derivative, integer_poly, sturm_count, univariate};

#[test]
fn sturm_oracle_sanity() {
    // (x - 1)(x + 2)(x - 7) has two roots in (-5, 5]
    let p = integer_poly(&[14, -9, -6, 1]);
    assert_eq!(sturm_count(&p, -5.0, 5.0), 2);
}

#[test]
fn univariate_counts_match_sturm() {
    for i in 0..100u64 {
        let d = 2 + (i % 5) as u32;
        let s = Seed::new(77).substream(i);
        let poly = sample_random_polynomial(1, d, s.substream(0)).unwrap();
        let found = find_critical_points(&poly, CENSUS_HALF_WIDTH, 100, CENSUS_TOL, s.substream(1)).unwrap();
        let dp = derivative(&univariate(&poly));
        let want = sturm_count(&dp, -CENSUS_HALF_WIDTH, CENSUS_HALF_WIDTH);
        assert_eq!(found.points.len(), want, "trial {i}, degree {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn returned_points_are_critical_and_distinct(n in 1usize..=3, d in 2u32..=5, seed in any::<u64>()) {
        let poly = sample_random_polynomial(n, d, Seed::new(seed)).unwrap();
        let found = find_critical_points(&poly, 5.0, 100, 1e-9, Seed::new(seed ^ 1)).unwrap();
        for (i, p) in found.points.iter().enumerate() {
            prop_assert!(p.gradient_norm <= 1e-9);
            let g = poly.gradient(&p.location);
            prop_assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() == p.gradient_norm);
            for q in &found.points[..i] {
                let dist = p.location.iter().zip(&q.location).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                prop_assert!(dist > DEDUP_RADIUS);
            }
        }
        prop_assert_eq!(found.converged + found.escaped + found.failed, found.starts);
    }
}

#[test]
fn relu_error_is_half_the_abs_error() {
    for d in 1..=12 {
        let a = relu_poly_approx(d).unwrap();
        assert!(a.sup_error <= 0.5 * a.abs_error * (1.0 + 1e-9), "degree {d}");
        assert!(a.sup_error >= 0.5 * a.abs_error * (1.0 - 1e-6), "degree {d}");
        // pointwise: relu - approx = (|x| - q(x)) / 2 with q = 2 approx - x
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            let q = 2.0 * a.eval(x) - x;
            assert!(((relu(x) - a.eval(x)) - 0.5 * (x.abs() - q)).abs() < 1e-15);
        }
    }
}

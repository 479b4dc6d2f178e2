use hdg_core::geometry::{expected_surface_distance, shell_probability};
use hdg_core::montecarlo::{estimate_expected_surface_distance, estimate_shell_probability, sample_points};
use hdg_core::{Seed, ShapeSpec};

#[test]
fn ball_estimates_cover_the_closed_form() {
    let ball = ShapeSpec::ball(10, 2.0).unwrap();
    let p = shell_probability(10, 0.1).unwrap();
    let e = expected_surface_distance(10, 2.0).unwrap();
    let (mut hits_p, mut hits_e) = (0, 0);
    for s in 0..100 {
        hits_p += estimate_shell_probability(&ball, 0.1, 20_000, Seed::new(s)).unwrap().within(p, 4.0) as usize;
        hits_e += estimate_expected_surface_distance(&ball, 20_000, Seed::new(1000 + s)).unwrap().within(e, 4.0) as usize;
    }
    assert!(hits_p >= 99 && hits_e >= 99, "{hits_p} {hits_e}");
}

#[test]
fn shell_estimate_grows_with_dimension() {
    let means: Vec<f64> = [2, 10, 100, 1000]
        .iter()
        .map(|&n| estimate_shell_probability(&ShapeSpec::ball(n, 1.0).unwrap(), 0.01, 100_000, Seed::new(n as u64)).unwrap().mean)
        .collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
}

/// Kolmogorov-Smirnov statistic of `‖x‖/R` against the CDF `r^n`.
#[test]
fn ball_radii_follow_the_power_law() {
    for n in [1, 3, 20] {
        let ball = ShapeSpec::ball(n, 3.0).unwrap();
        let pts = sample_points(&ball, 100_000, Seed::new(n as u64));
        let mut r: Vec<f64> = pts.chunks_exact(n).map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt() / 3.0).collect();
        r.sort_by(f64::total_cmp);
        let m = r.len() as f64;
        let d = r
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = x.powi(n as i32);
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value 1.628 / sqrt(m)
        assert!(d < 1.628 / m.sqrt(), "n = {n}: D = {d}");
    }
}

#[test]
fn same_seed_same_bits() {
    let e = ShapeSpec::ellipsoid(vec![1.0, 2.0, 0.5, 3.0]).unwrap();
    let a = estimate_expected_surface_distance(&e, 50_000, Seed::with_stream(9, 4)).unwrap();
    let b = estimate_expected_surface_distance(&e, 50_000, Seed::with_stream(9, 4)).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

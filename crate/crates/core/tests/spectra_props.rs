use hdg_core::spectra::{forward_haar, inverse_haar, mean_energy_per_pixel, expected_energy_per_pixel, ImageGrid, SubbandPowers};
use hdg_core::Seed;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn haar_is_an_isometry_on_random_images() {
    for side in [4usize, 8, 16, 32, 64] {
        let mut rng = Seed::new(side as u64).rng();
        for _ in 0..1000 {
            let img = ImageGrid::new(side, (0..side * side).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let levels = side.trailing_zeros() as usize;
            let pyr = forward_haar(&img, levels).unwrap();
            assert!((pyr.energy() - img.energy()).abs() <= 1e-9 * img.energy());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_round_trip(m in 1usize..6, seed in any::<u64>(), levels_off in 0usize..3) {
        let side = 1 << m;
        let mut rng = Seed::new(seed).rng();
        let img = ImageGrid::new(side, (0..side * side).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let levels = m.saturating_sub(levels_off).max(1);
        let back = inverse_haar(&forward_haar(&img, levels).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(img.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * 5.0 * side as f64);
        }
    }
}

#[test]
fn ensemble_energy_tracks_truncated_sum() {
    let base = SubbandPowers::new(1.0, 1.0, 1.0, 1.0).unwrap();
    for m in 1..=6 {
        let got = mean_energy_per_pixel(m, &base, 200, Seed::new(m as u64)).unwrap();
        let want = expected_energy_per_pixel(m, &base);
        assert!((got - want).abs() <= 0.05 * want, "m = {m}: {got} vs {want}");
    }
}

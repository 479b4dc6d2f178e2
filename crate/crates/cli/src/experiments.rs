//! One function per subcommand, each turning its parameter block into rows.

use hdg_core::adversarial::{
    fake_example_ascent, min_perturbation_linear, scaling_experiment, train, uniform_noise, LinearModel, ModelKind,
    NegativeSpec, PositiveLaw, ScalingMode, SgdConfig, SystemSpec,
};
use hdg_core::geometry::{
    dilation_volume_ratio, expected_surface_distance, shell_probability, CountingState, DilationMode, DilationQuery,
};
use hdg_core::landscape::{census, max_via_relu, relu_poly_approx, CensusResult};
use hdg_core::lid::{box_counting_auto, cube_flat, knn_lid, two_radius_from_counts, LidSupport};
use hdg_core::montecarlo::{
    estimate_expected_surface_distance, estimate_shell_probability, isoperimetric_compare, isoperimetric_shell_compare,
};
use hdg_core::spectra::{
    expected_energy_per_pixel, forward_haar, inverse_haar, mean_energy_per_pixel, radius_scaling_fit, synthesize,
    SubbandPowers,
};
use hdg_core::stats::{linear_fit, median};
use hdg_core::{Seed, ShapeSpec};

use crate::config::*;
use crate::output::{Check, Outcome, Row};
use crate::svg::Plot;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Experiment(e.to_string())
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn nonempty<T: Clone>(v: &Option<Vec<T>>, default: &[T], name: &str) -> Result<Vec<T>> {
    let v = v.clone().unwrap_or_else(|| default.to_vec());
    if v.is_empty() {
        return Err(bad(format!("{name} must not be empty")));
    }
    Ok(v)
}

fn pair(v: &Option<Vec<f64>>, default: (f64, f64), name: &str) -> Result<(f64, f64)> {
    match v.as_deref() {
        None => Ok(default),
        Some([a, b]) => Ok((*a, *b)),
        Some(_) => Err(bad(format!("{name} takes exactly two values"))),
    }
}

fn loglog_plot(title: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>, with_fit: bool) -> Plot {
    let fit = with_fit
        .then(|| {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).unzip();
            linear_fit(&xs, &ys).map(|f| (f.slope, f.intercept))
        })
        .flatten();
    Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), points, fit }
}

pub fn run(experiment: &Experiment, seed: Seed) -> Result<Outcome> {
    match experiment {
        Experiment::ShellProb(p) => shell_prob(p, seed),
        Experiment::SurfaceDistance(p) => surface_distance(p, seed),
        Experiment::Isoperimetric(p) => isoperimetric(p, seed),
        Experiment::Dilation(p) => dilation(p),
        Experiment::Counting(p) => counting(p),
        Experiment::SpectraFit(p) => spectra_fit(p, seed),
        Experiment::LandscapeCensus(p) => landscape_census(p, seed),
        Experiment::ReluApprox(p) => relu_approx(p),
        Experiment::Lid(p) => lid(p, seed),
        Experiment::AdvScaling(p) => adv_scaling(p, seed),
        Experiment::FakeAscent(p) => fake_ascent(p, seed),
        Experiment::Report(_) => Err(bad("report is not an experiment")),
    }
}

fn shell_prob(p: &ShellProbParams, seed: Seed) -> Result<Outcome> {
    let ns = nonempty(&p.n, &[2, 10, 100, 1000], "n")?;
    let alphas = nonempty(&p.alpha, &[0.01, 0.1, 0.5], "alpha")?;
    let radius = p.radius.unwrap_or(1.0);
    let samples = p.samples.unwrap_or(100_000);
    let k = p.k_sigma.unwrap_or(4.0);
    let mut rows = Vec::new();
    for &n in &ns {
        let ball = ShapeSpec::ball(n, radius).map_err(fail)?;
        for &alpha in &alphas {
            let s = seed.substream(n as u64).substream(alpha.to_bits());
            let est = estimate_shell_probability(&ball, alpha, samples, s).map_err(fail)?;
            let exact = shell_probability(n, alpha).map_err(fail)?;
            let key = format!("n={n};alpha={alpha}");
            rows.push(Row::checked("shell_probability", &key, est.mean, exact, k * est.stderr, Check::Abs));
            rows.push(Row::info("shell_probability_stderr", key, est.stderr));
        }
    }
    Ok(Outcome { rows, plot: None })
}

fn surface_distance(p: &SurfaceDistanceParams, seed: Seed) -> Result<Outcome> {
    let ns = nonempty(&p.n, &[2, 10, 100, 1000], "n")?;
    let radius = p.radius.unwrap_or(1.0);
    let samples = p.samples.unwrap_or(100_000);
    let k = p.k_sigma.unwrap_or(4.0);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &ns {
        let ball = ShapeSpec::ball(n, radius).map_err(fail)?;
        let est = estimate_expected_surface_distance(&ball, samples, seed.substream(n as u64)).map_err(fail)?;
        let exact = expected_surface_distance(n, radius).map_err(fail)?;
        let key = format!("n={n}");
        rows.push(Row::checked("mean_surface_distance", &key, est.mean, exact, k * est.stderr, Check::Abs));
        rows.push(Row::info("mean_surface_distance_stderr", key, est.stderr));
        points.push((n as f64, est.mean));
    }
    let plot = loglog_plot("Mean distance to the sphere", "n", "E[distance]", points, ns.len() >= 2);
    if let Some((slope, _)) = plot.fit {
        rows.push(Row::info("loglog_slope", "", slope));
    }
    Ok(Outcome { rows, plot: Some(plot) })
}

fn isoperimetric(p: &IsoperimetricParams, seed: Seed) -> Result<Outcome> {
    let ns = nonempty(&p.n, &[2, 10, 50], "n")?;
    let shapes = nonempty(&p.shapes, &[ShapeChoice::Box, ShapeChoice::Ellipsoid], "shapes")?;
    let aspect = p.aspect.unwrap_or(1.5);
    let samples = p.samples.unwrap_or(100_000);
    let k = p.k_sigma.unwrap_or(3.0);
    if !(aspect.is_finite() && aspect >= 1.0) {
        return Err(bad(format!("aspect = {aspect}, need a finite value >= 1")));
    }
    let mut rows = Vec::new();
    for &shape in &shapes {
        for &n in &ns {
            if n < 2 {
                return Err(bad("isoperimetric comparisons need n >= 2"));
            }
            // half the axes short, half long
            let axes: Vec<f64> = (0..n).map(|i| if 2 * i < n { 1.0 } else { aspect }).collect();
            let (name, body) = match shape {
                ShapeChoice::Box => ("box", ShapeSpec::axis_box(axes)),
                ShapeChoice::Ellipsoid => ("ellipsoid", ShapeSpec::ellipsoid(axes)),
            };
            let body = body.map_err(fail)?;
            let s = seed.substream(shape as u64).substream(n as u64);
            let shell = isoperimetric_shell_compare(&body, samples, s.substream(0)).map_err(fail)?;
            let dist = isoperimetric_compare(&body, samples, s.substream(1)).map_err(fail)?;
            let key = format!("shape={name};n={n}");
            rows.push(Row::checked(
                "band_probability_excess",
                &key,
                shell.p_shape.mean - shell.p_ball.mean,
                0.0,
                k * shell.combined_stderr(),
                Check::Gt,
            ));
            rows.push(Row::info_vs("band_probability_ball", &key, shell.p_ball.mean, shell.p_ball_exact));
            rows.push(Row::checked(
                "surface_distance_deficit",
                &key,
                dist.e_ball.mean - dist.e_shape.mean,
                0.0,
                k * dist.combined_stderr(),
                Check::Gt,
            ));
            rows.push(Row::info("surface_distance_ratio", key, dist.ratio));
        }
    }
    Ok(Outcome { rows, plot: None })
}

fn dilation(p: &DilationParams) -> Result<Outcome> {
    let alphas = nonempty(&p.alpha, &[0.5, 1.0, 2.0], "alpha")?;
    let mode = p.mode.unwrap_or(DilationModeArg::InverseN);
    let n_max = p.n_max.unwrap_or(10_000);
    let rel_tol = p.rel_tol.unwrap_or(0.01);
    if n_max == 0 {
        return Err(bad("n_max must be >= 1"));
    }
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |n| n.checked_mul(10)).take_while(|n| *n < n_max).collect();
    grid.push(n_max);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &alpha in &alphas {
        for &n in &grid {
            let key = format!("alpha={alpha};n={n}");
            match mode {
                DilationModeArg::InverseN => {
                    let q = DilationQuery::new(alpha, DilationMode::InverseN).map_err(fail)?;
                    let r = dilation_volume_ratio(n, q).map_err(fail)?;
                    if n == n_max {
                        rows.push(Row::checked("dilation_ratio", key, r.ratio, alpha.exp(), rel_tol, Check::Rel));
                    } else {
                        rows.push(Row::info_vs("dilation_ratio", key, r.ratio, alpha.exp()));
                    }
                    if alpha == alphas[0] {
                        points.push((n as f64, r.ratio));
                    }
                }
                DilationModeArg::Proportional => {
                    let q = DilationQuery::new(alpha, DilationMode::Proportional).map_err(fail)?;
                    let r = dilation_volume_ratio(n, q).map_err(fail)?;
                    let exact = n as f64 * alpha.ln_1p();
                    rows.push(Row::checked("dilation_log_ratio", key, r.log_ratio, exact, 0.0, Check::Abs));
                    if alpha == alphas[0] {
                        points.push((n as f64, r.log_ratio));
                    }
                }
            }
        }
    }
    let plot = match mode {
        DilationModeArg::InverseN => {
            loglog_plot(&format!("Dilated volume ratio, alpha = {}", alphas[0]), "n", "ratio", points, false)
        }
        DilationModeArg::Proportional => loglog_plot(
            &format!("Dilated log volume ratio, alpha = {}", alphas[0]),
            "n",
            "log ratio",
            points,
            grid.len() >= 2,
        ),
    };
    Ok(Outcome { rows, plot: Some(plot) })
}

fn counting(p: &CountingParams) -> Result<Outcome> {
    let log_u = p.log_u.unwrap_or(0.0);
    let log_c = p.log_c.unwrap_or(0.0);
    let pixels = p.pixels.unwrap_or(1);
    let k = p.k.unwrap_or(hdg_core::geometry::EIGHT_BIT_TRIPLE_CHOICES);
    let t = p.t.unwrap_or(k.saturating_sub(1));
    let steps = p.steps.unwrap_or(5);
    let start = CountingState::new(log_u, log_c, pixels, k, t).map_err(fail)?;
    let ln_ratio = (-((k - t) as f64) / k as f64).ln_1p();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for s in 0..=steps {
        let st = start.advance(s).map_err(fail)?;
        // sum of n 4^i over the steps taken
        let added = pixels as f64 * (4f64.powi(s as i32) - 1.0) / 3.0;
        let predicted = (log_c - log_u) + added * ln_ratio;
        let tol = 1e-12 * (1.0 + st.log_u().abs() + st.log_c().abs());
        let key = format!("step={s};pixels={}", st.pixels());
        rows.push(Row::checked("log_class_fraction", &key, st.log_fraction(), predicted, tol, Check::Abs));
        rows.push(Row::info("log_universe", key, st.log_u()));
        points.push((st.pixels() as f64, -st.log_fraction()));
    }
    let plot = loglog_plot("Class fraction under resolution growth", "pixels", "-ln(c/u)", points, true);
    Ok(Outcome { rows, plot: Some(plot) })
}

fn spectra_fit(p: &SpectraFitParams, seed: Seed) -> Result<Outcome> {
    let ms = nonempty(&p.m, &[3, 4, 5, 6, 7, 8], "m")?;
    let samples = p.samples.unwrap_or(30);
    let seeds = p.seeds.unwrap_or(10);
    let base = SubbandPowers::new(p.l_ll.unwrap_or(1.0), p.h_lh.unwrap_or(1.0), p.h_hl.unwrap_or(1.0), p.h_hh.unwrap_or(1.0))
        .map_err(fail)?;
    let (lo, hi) = pair(&p.slope_range, (0.45, 0.55), "slope_range")?;
    let draws = p.energy_draws.unwrap_or(2000);
    let energy_tol = p.energy_tol.unwrap_or(0.05);
    let images = p.isometry_images.unwrap_or(100);
    let mut rows = Vec::new();

    for &m in &ms {
        let (mut energy_err, mut round_trip_err) = (0.0f64, 0.0f64);
        for i in 0..images as u64 {
            let img = synthesize(m, &base, seed.substream(0).substream(m as u64).substream(i)).map_err(fail)?;
            let pyr = forward_haar(&img, m).map_err(fail)?;
            let e = img.energy();
            energy_err = energy_err.max((pyr.energy() - e).abs() / e);
            let back = inverse_haar(&pyr).map_err(fail)?;
            let diff: f64 = back.values().iter().zip(img.values()).map(|(a, b)| (a - b) * (a - b)).sum();
            round_trip_err = round_trip_err.max((diff / e).sqrt());
        }
        let key = format!("m={m}");
        rows.push(Row::checked("haar_energy_rel_error", &key, energy_err, 0.0, 1e-9, Check::Le));
        rows.push(Row::checked("haar_round_trip_rel_error", &key, round_trip_err, 0.0, 1e-9, Check::Le));
        let mean = mean_energy_per_pixel(m, &base, draws, seed.substream(1).substream(m as u64)).map_err(fail)?;
        rows.push(Row::checked("energy_per_pixel", key, mean, expected_energy_per_pixel(m, &base), energy_tol, Check::Rel));
    }

    let mut plot = None;
    for s in 0..seeds {
        let fit = radius_scaling_fit(&ms, samples, &base, seed.substream(2).substream(s)).map_err(fail)?;
        for l in &fit.levels {
            rows.push(Row::info("mean_norm", format!("seed={s};m={}", l.m), l.mean_norm));
        }
        rows.push(Row::checked("radius_slope", format!("seed={s}"), fit.slope, 0.5 * (lo + hi), 0.5 * (hi - lo), Check::Abs));
        if plot.is_none() {
            plot = Some(Plot {
                title: "Image norm against pixel count".into(),
                x_label: "pixels".into(),
                y_label: "mean norm".into(),
                points: fit.levels.iter().map(|l| (l.pixels as f64, l.mean_norm)).collect(),
                fit: Some((fit.slope, fit.intercept)),
            });
        }
    }
    Ok(Outcome { rows, plot })
}

fn landscape_census(p: &LandscapeCensusParams, seed: Seed) -> Result<Outcome> {
    let mut n_vars = nonempty(&p.n_vars, &[1, 2, 3], "n_vars")?;
    let degrees = nonempty(&p.degrees, &[3, 4, 5], "degrees")?;
    let trials = p.trials.unwrap_or(200);
    let minima_degree = p.minima_degree.unwrap_or(4);
    let run = |n: usize, d: u32| census(n, d, trials, seed.substream(n as u64).substream(d as u64)).map_err(fail);

    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &n_vars {
        for &d in &degrees {
            let c = run(n, d)?;
            let key = format!("n={n};d={d}");
            rows.push(Row::checked(
                "mean_critical_points",
                &key,
                c.mean_critical_points,
                c.bound_c,
                2.0 * c.critical_stderr,
                Check::Le,
            ));
            rows.push(Row::info("mean_minima", &key, c.mean_minima));
            rows.push(Row::info("minima_fraction", &key, c.minima_fraction));
            rows.push(Row::info("mean_degenerate", &key, c.mean_degenerate));
            rows.push(Row::info("nonconvergence_fraction", key, c.nonconvergence_fraction));
            points.push((c.bound_c, c.mean_critical_points));
        }
    }

    n_vars.sort_unstable();
    n_vars.dedup();
    let trend: Vec<CensusResult> = n_vars.iter().map(|&n| run(n, minima_degree)).collect::<Result<_>>()?;
    for w in trend.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        rows.push(Row::checked(
            "minima_fraction_step",
            format!("d={minima_degree};n={}->{}", a.n_vars, b.n_vars),
            b.minima_fraction - a.minima_fraction,
            0.0,
            2.0 * a.minima_fraction_stderr.hypot(b.minima_fraction_stderr),
            Check::Le,
        ));
    }
    let plot = loglog_plot("Mean critical points against the bound", "bound", "mean count", points, true);
    Ok(Outcome { rows, plot: Some(plot) })
}

fn relu_approx(p: &ReluApproxParams) -> Result<Outcome> {
    let mut degrees = nonempty(&p.degrees, &[2, 4, 8, 16, 32], "degrees")?;
    degrees.sort_unstable();
    degrees.dedup();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut prev: Option<f64> = None;
    for &d in &degrees {
        let a = relu_poly_approx(d).map_err(fail)?;
        let key = format!("degree={d}");
        rows.push(Row::info("sup_error", &key, a.sup_error));
        rows.push(Row::checked("half_abs_error", &key, a.sup_error, 0.5 * a.abs_error, 1e-3, Check::Rel));
        if let Some(e) = prev {
            rows.push(Row::checked("sup_error_step", &key, a.sup_error - e, 0.0, 0.0, Check::Le));
        }
        prev = Some(a.sup_error);
        points.push((d as f64, a.sup_error));
    }
    let grid = 200;
    let mut worst = 0.0f64;
    for i in 0..=grid {
        for j in 0..=grid {
            let x = -1.0 + 2.0 * i as f64 / grid as f64;
            let y = -1.0 + 2.0 * j as f64 / grid as f64;
            worst = worst.max((max_via_relu(x, y) - x.max(y)).abs());
        }
    }
    rows.push(Row::checked("max_identity_error", "grid=201x201", worst, 0.0, 4.0 * f64::EPSILON, Check::Le));
    let plot = loglog_plot("Uniform ReLU approximation error", "degree", "sup error", points, degrees.len() >= 2);
    Ok(Outcome { rows, plot: Some(plot) })
}

fn lid(p: &LidParams, seed: Seed) -> Result<Outcome> {
    let ms = nonempty(&p.m, &[1, 2, 5], "m")?;
    let ambient = p.ambient.unwrap_or(10);
    let points = p.points.unwrap_or(10_000);
    let k = p.k.unwrap_or(50);
    let queries = p.queries.unwrap_or(200);
    let rel_tol = p.rel_tol.unwrap_or(0.15);
    let mut rows = Vec::new();
    let mut plot = None;
    for &m in &ms {
        let cloud = cube_flat(m, ambient, points, seed.substream(m as u64)).map_err(fail)?;
        let key = format!("m={m}");
        let bc = box_counting_auto(&cloud).map_err(fail)?;
        rows.push(Row::checked("box_counting", &key, bc.value, m as f64, rel_tol, Check::Rel));
        if let LidSupport::BoxCounts(counts) = &bc.support {
            plot = Some(loglog_plot(
                &format!("Box counts, m = {m}"),
                "1 / epsilon",
                "occupied cells",
                counts.iter().map(|(e, c)| (1.0 / e, *c as f64)).collect(),
                true,
            ));
        }
        let interior: Vec<usize> = (0..cloud.len())
            .filter(|&i| cloud.point(i)[..m].iter().all(|x| (0.25..0.75).contains(x)))
            .take(queries)
            .collect();
        if interior.is_empty() {
            return Err(bad("no interior query points; increase points"));
        }
        let values: Vec<f64> = interior
            .iter()
            .map(|&i| knn_lid(&cloud, cloud.point(i), k).map(|e| e.value))
            .collect::<std::result::Result<_, _>>()
            .map_err(fail)?;
        let med = median(&values).unwrap_or(f64::NAN);
        rows.push(Row::checked("knn_median", &key, med, m as f64, rel_tol, Check::Rel));
        rows.push(Row::info("knn_queries", &key, values.len() as f64));
        let exact = two_radius_from_counts(1.0, 10, 2.0, 10usize << m).map_err(fail)?;
        rows.push(Row::checked("two_radius_exact_counts", key, exact.value, m as f64, 4.0 * f64::EPSILON * m as f64, Check::Abs));
    }
    Ok(Outcome { rows, plot })
}

fn adv_scaling(p: &AdvScalingParams, seed: Seed) -> Result<Outcome> {
    let mode_arg = p.mode.unwrap_or(ScalingModeArg::Idealized);
    let trained = mode_arg == ScalingModeArg::Trained;
    let ns = nonempty(&p.n, &[4, 16, 64, 256], "n")?;
    let scale = p.scale.unwrap_or(1.0);
    let positive = match p.law.unwrap_or(RadiusLaw::SqrtN) {
        RadiusLaw::SqrtN => PositiveLaw::SqrtNBall { scale },
        RadiusLaw::Constant => PositiveLaw::ConstantBall { radius: scale },
        RadiusLaw::KBit => PositiveLaw::KBitBox { bits: p.bits.unwrap_or(8) },
    };
    let trials = p.trials.unwrap_or(if trained { 100 } else { 10_000 });
    let seeds = p.seeds.unwrap_or(if trained { 5 } else { 1 });
    let exponent = p.exponent.unwrap_or(-0.5);
    let exponent_tol = p.exponent_tol.unwrap_or(if trained { 0.1 } else { 0.02 });
    let (inner, outer) = pair(&p.shell, (1.0, 1.5), "shell")?;
    let template = SystemSpec {
        n: 1,
        positive,
        negative: NegativeSpec::Shell { inner, outer },
        train_per_class: p.train_per_class.unwrap_or(5000),
        val_per_class: p.val_per_class.unwrap_or(200),
        model: ModelKind::Mlp { hidden: p.hidden.unwrap_or(64) },
    };
    let mode = if trained {
        ScalingMode::Trained {
            sgd: SgdConfig {
                lr: p.lr.unwrap_or(0.05),
                epochs: p.epochs.unwrap_or(30),
                batch: p.batch.unwrap_or(32),
                momentum: p.momentum.unwrap_or(0.9),
                seed: Seed::new(0),
            },
            tol: p.tol.unwrap_or(1e-3),
        }
    } else {
        ScalingMode::Idealized
    };

    let mut rows = Vec::new();
    let mut plot = None;
    for s in 0..seeds {
        let r = scaling_experiment(&ns, trials, &template, &mode, seed.substream(s)).map_err(fail)?;
        for row in &r.per_n {
            let key = format!("seed={s};n={}", row.n);
            if trained {
                rows.push(Row::info("mean_norm", &key, row.mean_norm));
            } else {
                // exact flips: distance to the boundary, size / (n + 1) on average
                let size = positive.shape(row.n).map_err(fail)?.sizes()[0];
                let want = size / (row.n as f64 + 1.0);
                rows.push(Row::checked("mean_norm", &key, row.mean_norm, want, 4.0 * row.stderr + 1e-9 * want, Check::Abs));
            }
            rows.push(Row::info("mean_norm_stderr", &key, row.stderr));
            rows.push(Row::info("points", &key, row.points as f64));
            rows.push(Row::info("failures", &key, row.failures as f64));
            if let Some(acc) = row.val_accuracy {
                rows.push(Row::info("val_accuracy", &key, acc));
            }
            if row.aborted.is_some() {
                rows.push(Row::info("aborted", key, 1.0));
            }
        }
        let key = format!("seed={s}");
        rows.push(Row::checked("exponent", &key, r.exponent, exponent, exponent_tol, Check::Abs));
        rows.push(Row::info("exponent_stderr", key, r.exponent_stderr));
        if plot.is_none() {
            plot = Some(Plot {
                title: "Minimal perturbation against resolution".into(),
                x_label: "n".into(),
                y_label: "mean perturbation norm".into(),
                points: r.per_n.iter().map(|row| (row.n as f64, row.mean_norm)).collect(),
                fit: r.exponent.is_finite().then_some((r.exponent, r.intercept)),
            });
        }
    }

    let instances = p.linear_instances.unwrap_or(1000);
    if instances > 0 {
        let (rel, pad) = linear_exactness(instances, seed.substream(u64::MAX))?;
        let key = format!("instances={instances}");
        rows.push(Row::checked("linear_rel_error", &key, rel, 0.0, 1e-9, Check::Le));
        rows.push(Row::checked("linear_padding_change", key, pad, 0.0, 0.0, Check::Abs));
    }
    Ok(Outcome { rows, plot })
}

/// Worst relative error of the linear flip against `|w.x + b| / |w|`, and
/// the worst change under zero padding.
pub fn linear_exactness(instances: usize, seed: Seed) -> Result<(f64, f64)> {
    let (mut worst_rel, mut worst_pad) = (0.0f64, 0.0f64);
    for i in 0..instances {
        let n = 2 + i % 63;
        let s = seed.substream(i as u64);
        let model = LinearModel::random(n, s.substream(0)).map_err(fail)?;
        let x = uniform_noise(n, 1.0, s.substream(1));
        let r = min_perturbation_linear(&model, &x).map_err(fail)?;
        let score = model.w().iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + model.b();
        let analytic = score.abs() / model.w().iter().map(|v| v * v).sum::<f64>().sqrt();
        if analytic > 0.0 {
            worst_rel = worst_rel.max((r.norm - analytic).abs() / analytic);
        }
        let extra = 1 + i % 7;
        let mut w = model.w().to_vec();
        w.resize(n + extra, 0.0);
        let mut xp = x.clone();
        xp.resize(n + extra, 0.0);
        let padded = min_perturbation_linear(&LinearModel::new(w, model.b()).map_err(fail)?, &xp).map_err(fail)?;
        worst_pad = worst_pad.max((padded.norm - r.norm).abs());
        for (a, b) in padded.p.iter().zip(r.p.iter().chain(std::iter::repeat(&0.0))) {
            worst_pad = worst_pad.max((a - b).abs());
        }
    }
    Ok((worst_rel, worst_pad))
}

fn fake_ascent(p: &FakeAscentParams, seed: Seed) -> Result<Outcome> {
    let ns = nonempty(&p.n, &[16, 64], "n")?;
    let seeds = p.seeds.unwrap_or(10);
    let required = p.required.unwrap_or(8);
    let scale = p.scale.unwrap_or(1.0);
    let noise = p.noise.unwrap_or(2.5) * scale;
    let step = p.step.unwrap_or(0.1);
    let max_iters = p.max_iters.unwrap_or(10_000);
    let target = p.target.unwrap_or(1);
    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let spec = SystemSpec {
            n,
            positive: PositiveLaw::SqrtNBall { scale },
            negative: NegativeSpec::Shell { inner: 1.0, outer: 1.5 },
            train_per_class: p.train_per_class.unwrap_or(2000),
            val_per_class: 200,
            model: ModelKind::Mlp { hidden: p.hidden.unwrap_or(64) },
        };
        let mut successes = 0u64;
        for s in 0..seeds {
            let base = seed.substream(i as u64).substream(s);
            let sgd = SgdConfig {
                lr: p.lr.unwrap_or(0.05),
                epochs: p.epochs.unwrap_or(30),
                batch: p.batch.unwrap_or(32),
                momentum: p.momentum.unwrap_or(0.9),
                seed: base.substream(0),
            };
            let sys = train(&spec, &sgd).map_err(fail)?;
            let start = uniform_noise(n, noise, base.substream(1));
            let key = format!("n={n};seed={s}");
            rows.push(Row::info("val_accuracy", &key, sys.val_accuracy));
            match fake_example_ascent(&sys.model, &start, target, step, max_iters) {
                Ok(res) => {
                    successes += u64::from(res.reached);
                    let radius = res.image.iter().map(|v| v * v).sum::<f64>().sqrt() / sys.positive_shape.radius();
                    rows.push(Row::info("final_confidence", &key, res.confidence()));
                    rows.push(Row::info("iterations", &key, res.iterations() as f64));
                    rows.push(Row::info("radius_over_r", key, radius));
                }
                Err(hdg_core::adversarial::AdversarialError::NoAscentDirection) => {
                    rows.push(Row::info("final_confidence", key, f64::NAN));
                }
                Err(e) => return Err(fail(e)),
            }
        }
        rows.push(Row::checked("successes", format!("n={n}"), successes as f64, required as f64, 0.0, Check::Ge));
    }
    Ok(Outcome { rows, plot: None })
}

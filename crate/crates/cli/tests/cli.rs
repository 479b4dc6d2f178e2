//! End-to-end runs of the `hdg` binary: golden results, exit codes, report
//! behaviour, and config serialization.
//!
//! Regenerate the goldens with `HDG_BLESS=1 cargo test -p hdg-cli --test cli`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdg_cli::config::*;
use hdg_cli::output::RunRecord;
use proptest::prelude::*;

fn hdg() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hdg"));
    c.env_remove(hdg_cli::THREADS_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    hdg().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn record(dir: &Path) -> RunRecord {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

fn golden(name: &str) {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join(name);
    let cfg = golden_dir().join(format!("{name}.json"));
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let path = golden_dir().join(format!("{name}.csv"));
    if std::env::var_os("HDG_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(&path).unwrap(), "{name} differs from its golden file");
    let rec = record(&out);
    assert_eq!(rec.subcommand(), name);
    assert!(rec.all_pass);
    assert!(!out.join(hdg_cli::output::LOCK_FILE).exists());
}

macro_rules! goldens {
    ($($test:ident = $name:literal;)*) => {
        $(#[test] fn $test() { golden($name); })*

        #[test]
        fn every_subcommand_has_a_golden() {
            let have = [$($name),*];
            for name in Experiment::NAMES.iter().filter(|n| **n != "report") {
                assert!(have.contains(name), "{name}");
            }
        }
    };
}

goldens! {
    golden_shell_prob = "shell-prob";
    golden_surface_distance = "surface-distance";
    golden_isoperimetric = "isoperimetric";
    golden_dilation = "dilation";
    golden_counting = "counting";
    golden_spectra_fit = "spectra-fit";
    golden_landscape_census = "landscape-census";
    golden_relu_approx = "relu-approx";
    golden_lid = "lid";
    golden_adv_scaling = "adv-scaling";
    golden_fake_ascent = "fake-ascent";
}

fn rows(dir: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(dir.join("results.csv")).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn shell_probability_example() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("s");
    let o = run(&[
        "shell-prob", "--n", "1000", "--alpha", "0.01", "--samples", "100000", "--seed", "7", "--out-dir",
        d.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = rows(&d).into_iter().find(|r| &r[1] == "shell_probability").unwrap();
    let v: f64 = r[3].parse().unwrap();
    assert!((v - 0.99996).abs() < 1e-4, "{v}");
    assert_eq!(&r[7], "true");
}

#[test]
fn dilation_example() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let o = run(&["dilation", "--alpha", "1", "--mode", "inverse-n", "--n-max", "10000", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let last = rows(&d).pop().unwrap();
    let v: f64 = last[3].parse().unwrap();
    assert!((v / std::f64::consts::E - 1.0).abs() < 0.01, "{v}");
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let o = run(&["dilation", "--alpha", "1", "--n-max", "10", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(rows(&d).iter().any(|r| &r[7] == "false"));
    assert!(!record(&d).all_pass);
}

#[test]
fn errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |s: &str| tmp.path().join(s).to_str().unwrap().to_string();

    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["counting", "--no-such-flag", "1"])), 2);
    assert_eq!(code(&run(&["run"])), 2);

    std::fs::write(p("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&run(&["run", "--config", &p("bad.json")])), 2);
    std::fs::write(p("extra.json"), r#"{"experiment": {"subcommand": "counting", "params": {"stepz": 1}}}"#).unwrap();
    assert_eq!(code(&run(&["run", "--config", &p("extra.json")])), 2);
    std::fs::write(p("other.json"), r#"{"experiment": {"subcommand": "lid", "params": {}}}"#).unwrap();
    assert_eq!(code(&run(&["counting", "--config", &p("other.json"), "--out-dir", &p("o")])), 2);
    assert_eq!(code(&run(&["run", "--config", &p("missing.json")])), 2);

    std::fs::write(p("file"), "").unwrap();
    assert_eq!(code(&run(&["counting", "--out-dir", &p("file/sub")])), 2);

    std::fs::create_dir(p("locked")).unwrap();
    std::fs::write(tmp.path().join("locked").join(hdg_cli::output::LOCK_FILE), "1").unwrap();
    assert_eq!(code(&run(&["counting", "--out-dir", &p("locked")])), 2);
    assert!(!tmp.path().join("locked/results.csv").exists());

    let o = hdg().env(hdg_cli::THREADS_ENV, "zero").args(["counting", "--out-dir", &p("t")]).output().unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["shell-prob", "--alpha", "2", "--out-dir", &p("a")])), 2);
    assert_eq!(code(&run(&["relu-approx", "--degrees", "", "--out-dir", &p("r")])), 2);
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["counting", "--help"], &["report", "--help"]] {
        let o = run(args);
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 3, "experiment": {"subcommand": "counting", "params": {"steps": 2, "pixels": 16}}}"#).unwrap();
    let d = tmp.path().join("o");
    let o = run(&["counting", "--config", cfg.to_str().unwrap(), "--steps", "3", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rec = record(&d);
    assert_eq!(rec.config.seed, 3);
    match rec.config.experiment {
        Experiment::Counting(p) => assert_eq!((p.steps, p.pixels), (Some(3), Some(16))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn report_over_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |s: &str| tmp.path().join(s).to_str().unwrap().to_string();

    let o = run(&["report", "--out-dir", &p("empty")]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(tmp.path().join("empty/report.md")).unwrap().contains("No runs."));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("empty/summary.csv")).unwrap(),
        "group,runs,checks,failed,status\n"
    );

    assert_eq!(code(&run(&["counting", "--steps", "2", "--out-dir", &p("good")])), 0);
    assert_eq!(code(&run(&["dilation", "--alpha", "1", "--n-max", "10", "--out-dir", &p("bad")])), 1);
    std::fs::create_dir(p("corrupt")).unwrap();
    std::fs::write(tmp.path().join("corrupt/run.json"), "{").unwrap();

    let o = run(&["report", &p("good"), &p("corrupt"), "--out-dir", &p("r1")]);
    assert_eq!(code(&o), 0, "an unreadable run alone does not fail the report");
    let md = std::fs::read_to_string(tmp.path().join("r1/report.md")).unwrap();
    assert!(md.contains("Unreadable runs") && md.contains("corrupt"));

    let o = run(&["report", &p("good"), &p("bad"), "--out-dir", &p("r2")]);
    assert_eq!(code(&o), 1);
    let summary = std::fs::read_to_string(tmp.path().join("r2/summary.csv")).unwrap();
    assert!(summary.contains("Dilation of a ball,1,"), "{summary}");
    assert!(summary.lines().any(|l| l.starts_with("Dilation") && l.ends_with(",FAIL")));
    assert!(summary.lines().any(|l| l.starts_with("Wavelet") && l.ends_with(",PASS")));
    assert!(std::fs::read_to_string(tmp.path().join("r2/report.md")).unwrap().contains("| FAIL |"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn of<T: std::fmt::Debug>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<T>> {
    prop::option::of(s)
}

fn list<T: std::fmt::Debug>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<Vec<T>>> {
    prop::option::of(prop::collection::vec(s, 0..4))
}

fn experiment() -> impl Strategy<Value = Experiment> {
    let f = finite;
    let u = any::<usize>;
    let shape = prop_oneof![Just(ShapeChoice::Box), Just(ShapeChoice::Ellipsoid)];
    let dmode = prop_oneof![Just(DilationModeArg::InverseN), Just(DilationModeArg::Proportional)];
    let smode = prop_oneof![Just(ScalingModeArg::Idealized), Just(ScalingModeArg::Trained)];
    let law = prop_oneof![Just(RadiusLaw::SqrtN), Just(RadiusLaw::Constant), Just(RadiusLaw::KBit)];
    prop_oneof![
        (list(u()), list(f()), of(f()), of(u()), of(f())).prop_map(|(n, alpha, radius, samples, k_sigma)| {
            Experiment::ShellProb(ShellProbParams { n, alpha, radius, samples, k_sigma })
        }),
        (list(u()), of(f()), of(u()), of(f())).prop_map(|(n, radius, samples, k_sigma)| {
            Experiment::SurfaceDistance(SurfaceDistanceParams { n, radius, samples, k_sigma })
        }),
        (list(u()), of(f()), list(shape), of(u()), of(f())).prop_map(|(n, aspect, shapes, samples, k_sigma)| {
            Experiment::Isoperimetric(IsoperimetricParams { n, aspect, shapes, samples, k_sigma })
        }),
        (list(f()), of(dmode), of(u()), of(f()))
            .prop_map(|(alpha, mode, n_max, rel_tol)| Experiment::Dilation(DilationParams { alpha, mode, n_max, rel_tol })),
        (of(f()), of(f()), of(any::<u64>()), of(any::<u64>()), of(any::<u64>()), of(any::<u32>())).prop_map(
            |(log_u, log_c, pixels, k, t, steps)| Experiment::Counting(CountingParams { log_u, log_c, pixels, k, t, steps })
        ),
        (
            (list(u()), of(u()), of(any::<u64>()), of(f()), of(f()), of(f())),
            (of(f()), list(f()), of(u()), of(f()), of(u()))
        )
            .prop_map(|((m, samples, seeds, l_ll, h_lh, h_hl), (h_hh, slope_range, energy_draws, energy_tol, isometry_images))| {
                Experiment::SpectraFit(SpectraFitParams {
                    m,
                    samples,
                    seeds,
                    l_ll,
                    h_lh,
                    h_hl,
                    h_hh,
                    slope_range,
                    energy_draws,
                    energy_tol,
                    isometry_images,
                })
            }),
        (list(u()), list(any::<u32>()), of(u()), of(any::<u32>())).prop_map(|(n_vars, degrees, trials, minima_degree)| {
            Experiment::LandscapeCensus(LandscapeCensusParams { n_vars, degrees, trials, minima_degree })
        }),
        list(u()).prop_map(|degrees| Experiment::ReluApprox(ReluApproxParams { degrees })),
        (list(u()), of(u()), of(u()), of(u()), of(u()), of(f())).prop_map(|(m, ambient, points, k, queries, rel_tol)| {
            Experiment::Lid(LidParams { m, ambient, points, k, queries, rel_tol })
        }),
        (
            (of(smode), of(law), of(f()), of(any::<u32>()), list(u()), of(u()), of(any::<u64>())),
            (of(f()), of(f()), of(u()), of(u()), of(u()), list(f())),
            (of(u()), of(f()), of(f()), of(u()), of(f()), of(u()))
        )
            .prop_map(
                |(
                    (mode, law, scale, bits, n, trials, seeds),
                    (exponent, exponent_tol, hidden, train_per_class, val_per_class, shell),
                    (epochs, lr, momentum, batch, tol, linear_instances),
                )| {
                    Experiment::AdvScaling(AdvScalingParams {
                        mode,
                        law,
                        scale,
                        bits,
                        n,
                        trials,
                        seeds,
                        exponent,
                        exponent_tol,
                        hidden,
                        train_per_class,
                        val_per_class,
                        shell,
                        epochs,
                        lr,
                        momentum,
                        batch,
                        tol,
                        linear_instances,
                    })
                }
            ),
        (
            (list(u()), of(any::<u64>()), of(any::<u64>()), of(f()), of(f()), of(f()), of(u())),
            (of(u()), of(u()), of(u()), of(u()), of(f()), of(f()), of(u()))
        )
            .prop_map(
                |(
                    (n, seeds, required, scale, noise, step, max_iters),
                    (target, hidden, train_per_class, epochs, lr, momentum, batch),
                )| {
                    Experiment::FakeAscent(FakeAscentParams {
                        n,
                        seeds,
                        required,
                        scale,
                        noise,
                        step,
                        max_iters,
                        target,
                        hidden,
                        train_per_class,
                        epochs,
                        lr,
                        momentum,
                        batch,
                    })
                }
            ),
        list("[a-z0-9_/.-]{1,12}".prop_map(PathBuf::from)).prop_map(|dirs| Experiment::Report(ReportParams { dirs })),
    ]
}

proptest! {
    #[test]
    fn config_round_trips(
        seed in any::<u64>(),
        out_dir in of("[a-z0-9_/-]{1,12}".prop_map(PathBuf::from)),
        experiment in experiment(),
    ) {
        let cfg = ExperimentConfig { seed, out_dir, experiment };
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}

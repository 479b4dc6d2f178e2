//! The `hdg` command line: every experiment of `hdg-core` as a subcommand,
//! configured by JSON files or flags, writing `results.csv`, `run.json` and,
//! where there is something to plot, `plot.svg`.
//!
//! Exit codes: 0 when every tolerance check passes, 1 when one fails, 2 for
//! usage, configuration and output errors.

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use clap::Parser;
use hdg_core::Seed;
use thiserror::Error;

pub use config::{Cli, Experiment, ExperimentConfig};
pub use output::{MetricRecord, Outcome, Row, RunRecord};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "HDG_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Experiment(String),
    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.resolve().and_then(|cfg| execute(&cfg)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("hdg: {e}");
            2
        }
    }
}

fn thread_count() -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(available),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} = {v:?}, need a positive integer"))),
        },
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Runs one resolved config and writes its artifacts. Returns whether every
/// check passed.
pub fn execute(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let threads = thread_count()?;
    let out = cfg.out_dir();
    let _lock = output::DirLock::acquire(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;

    if let Experiment::Report(p) = &cfg.experiment {
        let report = report::Report::collect(p.dirs.as_deref().unwrap_or(&[]));
        report.write(&out)?;
        return Ok(report.all_pass());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let started_at = now();
    let outcome = pool.install(|| experiments::run(&cfg.experiment, Seed::new(cfg.seed)))?;
    let finished_at = now();
    write_artifacts(&out, cfg, &outcome, started_at, finished_at, threads)?;
    Ok(outcome.all_pass())
}

fn write_artifacts(
    out: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    started_at: String,
    finished_at: String,
    threads: usize,
) -> Result<(), CliError> {
    let mut csv = Vec::new();
    output::write_results(cfg.experiment.name(), &outcome.rows, &mut csv)?;
    std::fs::write(out.join("results.csv"), csv)?;
    if let Some(plot) = &outcome.plot {
        std::fs::write(out.join("plot.svg"), plot.render())?;
    }
    let record = RunRecord {
        tool: "hdg".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        started_at,
        finished_at,
        threads,
        metrics: outcome.rows.iter().map(MetricRecord::from).collect(),
        all_pass: outcome.all_pass(),
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(out.join("run.json"), json + "\n")?;
    Ok(())
}

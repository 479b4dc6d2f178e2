//! Result rows and the files written into a run directory.
//!
//! `results.csv` has the fixed header
//!
//! ```text
//! experiment,metric,key,value,predicted,tolerance,check,pass
//! ```
//!
//! One row per measurement. Floats are written with 17 significant digits
//! (`{:.16e}`), so they parse back to the same `f64`. `check` names the
//! comparison between `value` and `predicted`:
//!
//! | check | passes when |
//! |-------|-------------|
//! | `abs` | `abs(value - predicted) <= tolerance` |
//! | `rel` | `abs(value - predicted) <= tolerance * abs(predicted)` |
//! | `le`  | `value <= predicted + tolerance` |
//! | `ge`  | `value >= predicted - tolerance` |
//! | `gt`  | `value > predicted + tolerance` |
//! | `info`| never checked; `predicted`, `tolerance` and `pass` are empty or informational |
//!
//! `pass` is `true`, `false`, or empty for `info` rows.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const RESULTS_HEADER: [&str; 8] = ["experiment", "metric", "key", "value", "predicted", "tolerance", "check", "pass"];
pub const LOCK_FILE: &str = ".hdg.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Info,
    Abs,
    Rel,
    Le,
    Ge,
    Gt,
}

impl Check {
    pub fn as_str(self) -> &'static str {
        match self {
            Check::Info => "info",
            Check::Abs => "abs",
            Check::Rel => "rel",
            Check::Le => "le",
            Check::Ge => "ge",
            Check::Gt => "gt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub metric: String,
    pub key: String,
    pub value: f64,
    pub predicted: Option<f64>,
    pub tolerance: Option<f64>,
    pub check: Check,
}

impl Row {
    pub fn info(metric: &str, key: impl Into<String>, value: f64) -> Self {
        Self { metric: metric.into(), key: key.into(), value, predicted: None, tolerance: None, check: Check::Info }
    }

    pub fn checked(metric: &str, key: impl Into<String>, value: f64, predicted: f64, tolerance: f64, check: Check) -> Self {
        Self {
            metric: metric.into(),
            key: key.into(),
            value,
            predicted: Some(predicted),
            tolerance: Some(tolerance),
            check,
        }
    }

    /// Information row that still records a reference value.
    pub fn info_vs(metric: &str, key: impl Into<String>, value: f64, predicted: f64) -> Self {
        Self { predicted: Some(predicted), ..Self::info(metric, key, value) }
    }

    pub fn pass(&self) -> Option<bool> {
        let (v, p, t) = (self.value, self.predicted?, self.tolerance?);
        Some(match self.check {
            Check::Info => return None,
            Check::Abs => (v - p).abs() <= t,
            Check::Rel => (v - p).abs() <= t * p.abs(),
            Check::Le => v <= p + t,
            Check::Ge => v >= p - t,
            Check::Gt => v > p + t,
        })
    }
}

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// What one experiment produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub plot: Option<crate::svg::Plot>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass() != Some(false))
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_results<W: Write>(experiment: &str, rows: &[Row], w: W) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in rows {
        let pass = r.pass().map(|p| p.to_string()).unwrap_or_default();
        out.write_record([
            experiment,
            &r.metric,
            &r.key,
            &fmt_float(r.value),
            &fmt_opt(r.predicted),
            &fmt_opt(r.tolerance),
            r.check.as_str(),
            &pass,
        ])?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub key: String,
    /// `None` stands for a non-finite value.
    pub value: Option<f64>,
    pub predicted: Option<f64>,
    pub tolerance: Option<f64>,
    pub check: Check,
    pub pass: Option<bool>,
}

impl From<&Row> for MetricRecord {
    fn from(r: &Row) -> Self {
        Self {
            metric: r.metric.clone(),
            key: r.key.clone(),
            value: r.value.is_finite().then_some(r.value),
            predicted: r.predicted,
            tolerance: r.tolerance,
            check: r.check,
            pass: r.pass(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub started_at: String,
    pub finished_at: String,
    pub threads: usize,
    pub metrics: Vec<MetricRecord>,
    pub all_pass: bool,
}

impl RunRecord {
    pub fn subcommand(&self) -> &'static str {
        self.config.experiment.name()
    }
}

/// Advisory lock: the file exists while a process owns the directory.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
    _file: File,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        let mut file = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == io::ErrorKind::AlreadyExists {
                io::Error::new(e.kind(), format!("{} is held by another run", path.display()))
            } else {
                e
            }
        })?;
        writeln!(file, "{}", std::process::id())?;
        Ok(Self { path, _file: file })
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

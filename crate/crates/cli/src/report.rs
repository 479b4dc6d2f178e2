//! Collects run directories into `report.md` and `summary.csv`.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::output::{csv_writer, fmt_float, RunRecord};

/// Report groups in display order, each with the subcommands feeding it.
pub const GROUPS: &[(&str, &[&str])] = &[
    ("Concentration near the ball surface", &["shell-prob", "surface-distance"]),
    ("Other bodies against the equal-volume ball", &["isoperimetric"]),
    ("Adversarial distance against resolution", &["adv-scaling", "fake-ascent"]),
    ("Critical points of random polynomials", &["landscape-census", "relu-approx"]),
    ("Wavelet radius growth", &["spectra-fit", "counting"]),
    ("Dilation of a ball", &["dilation"]),
    ("Local intrinsic dimension", &["lid"]),
];

pub const SUMMARY_HEADER: [&str; 5] = ["group", "runs", "checks", "failed", "status"];

pub fn group_of(subcommand: &str) -> Option<&'static str> {
    GROUPS.iter().find(|(_, subs)| subs.contains(&subcommand)).map(|(g, _)| *g)
}

#[derive(Debug, Default)]
pub struct Report {
    pub runs: Vec<(PathBuf, RunRecord)>,
    /// Directories whose record could not be read, with the reason.
    pub unreadable: Vec<(PathBuf, String)>,
}

pub struct GroupSummary {
    pub group: &'static str,
    pub runs: usize,
    pub checks: usize,
    pub failed: usize,
}

impl Report {
    pub fn collect(dirs: &[PathBuf]) -> Self {
        let mut r = Report::default();
        for dir in dirs {
            let path = dir.join("run.json");
            let loaded = std::fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<RunRecord>(&t).map_err(|e| e.to_string()));
            match loaded {
                Ok(rec) => r.runs.push((dir.clone(), rec)),
                Err(e) => r.unreadable.push((dir.clone(), e)),
            }
        }
        r
    }

    fn runs_in(&self, group: &str) -> impl Iterator<Item = &(PathBuf, RunRecord)> + '_ {
        let group = group.to_string();
        self.runs.iter().filter(move |(_, rec)| group_of(rec.subcommand()) == Some(group.as_str()))
    }

    /// Groups with at least one run, in display order.
    pub fn summaries(&self) -> Vec<GroupSummary> {
        GROUPS
            .iter()
            .filter_map(|(group, _)| {
                let runs: Vec<_> = self.runs_in(group).collect();
                if runs.is_empty() {
                    return None;
                }
                let checked = runs.iter().flat_map(|(_, r)| &r.metrics).filter_map(|m| m.pass);
                let (checks, failed) = checked.fold((0, 0), |(c, f), p| (c + 1, f + usize::from(!p)));
                Some(GroupSummary { group, runs: runs.len(), checks, failed })
            })
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.summaries().iter().all(|s| s.failed == 0)
    }

    pub fn markdown(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        let mut s = String::from("# Experiment report\n\n");
        let summaries = self.summaries();
        if summaries.is_empty() {
            s.push_str("No runs.\n");
        } else {
            s.push_str("| Group | Runs | Checks | Failed | Status |\n|---|---|---|---|---|\n");
            for g in &summaries {
                let _ = writeln!(s, "| {} | {} | {} | {} | {} |", g.group, g.runs, g.checks, g.failed, status(g));
            }
        }
        for g in &summaries {
            let _ = writeln!(s, "\n## {}\n", g.group);
            s.push_str("| Run | Metric | Key | Value | Predicted | Tolerance | Check | Pass |\n|---|---|---|---|---|---|---|---|\n");
            for (dir, rec) in self.runs_in(g.group) {
                for m in rec.metrics.iter().filter(|m| m.pass.is_some()) {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {} | {} | {} | {} |",
                        dir.display(),
                        m.metric,
                        m.key,
                        m.value.map(fmt_float).unwrap_or_else(|| "NaN".into()),
                        opt(m.predicted),
                        opt(m.tolerance),
                        m.check.as_str(),
                        if m.pass == Some(true) { "PASS" } else { "FAIL" },
                    );
                }
            }
        }
        if !self.unreadable.is_empty() {
            s.push_str("\n## Unreadable runs\n\n");
            for (dir, why) in &self.unreadable {
                let _ = writeln!(s, "- `{}`: {}", dir.display(), why);
            }
        }
        s
    }

    pub fn write(&self, out_dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(out_dir)?;
        std::fs::write(out_dir.join("report.md"), self.markdown())?;
        let mut w = csv_writer(std::fs::File::create(out_dir.join("summary.csv"))?);
        w.write_record(SUMMARY_HEADER)?;
        for g in self.summaries() {
            w.write_record([g.group, &g.runs.to_string(), &g.checks.to_string(), &g.failed.to_string(), status(&g)])?;
        }
        w.flush()
    }
}

fn status(g: &GroupSummary) -> &'static str {
    if g.failed == 0 {
        "PASS"
    } else {
        "FAIL"
    }
}

//! Tabular summary of run manifests with acceptance checks.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::Result;

use super::config::Experiment;
use super::manifest::{RunManifest, RunStatus};

/// Controlled runs must shrink the distance to target at least this much.
pub const CONTROLLED_MAX_RATIO: f64 = 1e-2;
/// Free runs must not shrink it this much.
pub const FREE_MIN_RATIO: f64 = 1e-1;
/// Admissible range of successive convergence error ratios.
pub const CONVERGENCE_RATIO_RANGE: (f64, f64) = (3.0, 5.0);
pub const CLOSED_FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub path: PathBuf,
    pub experiment: Experiment,
    pub status: RunStatus,
    pub scalars: String,
    /// Acceptance violations; empty when the run passes.
    pub violations: Vec<String>,
}

impl SummaryRow {
    pub fn failed(&self) -> bool {
        self.status == RunStatus::Failed || !self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{:<20} {:<7} {:<60} {}\n", "experiment", "status", "scalars", "path");
        for row in &self.rows {
            let status = if row.failed() { "FAILED" } else { "ok" };
            let _ = writeln!(
                s,
                "{:<20} {:<7} {:<60} {}",
                row.experiment.name(),
                status,
                row.scalars,
                row.path.display()
            );
            for v in &row.violations {
                let _ = writeln!(s, "    ! {v}");
            }
        }
        s
    }
}

fn fmt_opt(label: &str, v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{label}={v:.4e}"),
        None => format!("{label}=-"),
    }
}

/// Key scalars and acceptance violations of one manifest.
pub fn check(manifest: &RunManifest) -> (String, Vec<String>) {
    let mut violations = Vec::new();
    if manifest.status == RunStatus::Failed {
        violations.push(format!(
            "run failed: {}",
            manifest.error.as_deref().unwrap_or("no error recorded")
        ));
    }
    let e = manifest.experiment();
    let scalars = if e.is_trajectory() {
        let ratio = manifest.scalar("distance_ratio");
        let mu = manifest.scalar("mu");
        if manifest.status == RunStatus::Ok {
            if e.is_controlled() {
                match ratio {
                    Some(r) if r <= CONTROLLED_MAX_RATIO => {}
                    Some(r) => violations.push(format!(
                        "final/initial distance {r:.3e} exceeds {CONTROLLED_MAX_RATIO:e}"
                    )),
                    None => violations.push("missing distance_ratio".into()),
                }
                if !mu.is_some_and(|m| m > 0.0) {
                    violations.push("fitted decay rate is not positive".into());
                }
            } else {
                match ratio {
                    Some(r) if r >= FREE_MIN_RATIO => {}
                    Some(r) => violations.push(format!(
                        "free run distance ratio {r:.3e} fell below {FREE_MIN_RATIO:e}"
                    )),
                    None => violations.push("missing distance_ratio".into()),
                }
            }
        }
        format!(
            "{} {} {}",
            fmt_opt("final_dist", manifest.scalar("final_distance")),
            fmt_opt("ratio", ratio),
            fmt_opt("mu", mu)
        )
    } else if e.is_convergence() {
        let (lo, hi) = CONVERGENCE_RATIO_RANGE;
        let mut parts = Vec::new();
        for level in 1..manifest.config.levels {
            let r = manifest.scalar(&format!("ratio.{level}"));
            parts.push(fmt_opt(&format!("ratio{level}"), r));
            if manifest.status == RunStatus::Ok && !r.is_some_and(|r| (lo..=hi).contains(&r)) {
                violations.push(format!("level {level} ratio outside [{lo}, {hi}]"));
            }
        }
        parts.join(" ")
    } else if e == Experiment::ProjTable {
        let gap = manifest.scalar("max_closed_form_gap");
        if manifest.status == RunStatus::Ok {
            if !gap.is_some_and(|g| g <= CLOSED_FORM_TOL) {
                violations.push("numeric minimum eigenvalue departs from the closed form".into());
            }
            if manifest.scalar("all_above_theta_inf") != Some(1.0) {
                violations.push("a minimum eigenvalue is not above its limit".into());
            }
            if manifest.scalar("all_certified") != Some(1.0) {
                violations.push("a Gram matrix was not certified invertible".into());
            }
        }
        format!("{} {}", fmt_opt("gap", gap), fmt_opt("max_norm", manifest.scalar("max_norm")))
    } else {
        match manifest.scalar("unstable_modes") {
            Some(k) => format!("unstable_modes={k}"),
            None => "unstable_modes=-".into(),
        }
    };
    (scalars, violations)
}

/// Reads and checks each manifest. Missing or corrupt manifests are errors.
pub fn summarize(paths: &[PathBuf]) -> Result<Summary> {
    let mut rows = Vec::with_capacity(paths.len());
    for path in paths {
        let manifest = RunManifest::read(path)?;
        let (scalars, violations) = check(&manifest);
        rows.push(SummaryRow {
            path: path.clone(),
            experiment: manifest.experiment(),
            status: manifest.status,
            scalars,
            violations,
        });
    }
    Ok(Summary { rows })
}

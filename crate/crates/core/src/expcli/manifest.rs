//! Run manifests: a `key = value` record of one experiment run.
//!
//! ```text
//! status = ok
//! config.experiment = fluid-controlled
//! config.nu2 = 0.000001
//! ...
//! output = trajectory.csv
//! summary.final_distance = 5.8689100827060560e-7
//! ```
//!
//! Output paths are relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::{resolve_config, ExperimentConfig, KEYS};
use super::write_atomic;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Failed,
}

impl RunStatus {
    fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub status: RunStatus,
    /// Solver error for failed runs.
    pub error: Option<String>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn experiment(&self) -> super::Experiment {
        self.config.experiment
    }

    pub fn wall_seconds(&self) -> f64 {
        self.finished - self.started
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "status = {}", self.status.as_str());
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error = {}", e.replace('\n', " "));
        }
        let _ = writeln!(out, "started = {}", self.started);
        let _ = writeln!(out, "finished = {}", self.finished);
        for key in KEYS {
            let _ = writeln!(out, "config.{key} = {}", self.config.get(key).expect("known key"));
        }
        for path in &self.outputs {
            let _ = writeln!(out, "output = {}", path.display());
        }
        for (key, value) in &self.summary {
            let _ = writeln!(out, "summary.{key} = {value:.16e}");
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |message: String| Error::Manifest { path: path.display().to_string(), message };
        let mut status = None;
        let mut error = None;
        let (mut started, mut finished) = (None, None);
        let mut config_text = String::new();
        let mut outputs = Vec::new();
        let mut summary = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", idx + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: `{v}` is not a number", idx + 1)))
            };
            match key {
                "status" => {
                    status = Some(match value {
                        "ok" => RunStatus::Ok,
                        "failed" => RunStatus::Failed,
                        other => return Err(bad(format!("unknown status `{other}`"))),
                    })
                }
                "error" => error = Some(value.to_string()),
                "started" => started = Some(number(value)?),
                "finished" => finished = Some(number(value)?),
                "output" => outputs.push(PathBuf::from(value)),
                _ => {
                    if let Some(k) = key.strip_prefix("config.") {
                        let _ = writeln!(config_text, "{k} = {value}");
                    } else if let Some(k) = key.strip_prefix("summary.") {
                        summary.insert(k.to_string(), number(value)?);
                    } else {
                        return Err(bad(format!("line {}: unknown key `{key}`", idx + 1)));
                    }
                }
            }
        }
        let config = resolve_config(&config_text, &[]).map_err(|e| bad(format!("config: {e}")))?;
        Ok(Self {
            config,
            status: status.ok_or_else(|| bad("missing status".into()))?,
            error,
            started: started.ok_or_else(|| bad("missing start time".into()))?,
            finished: finished.ok_or_else(|| bad("missing finish time".into()))?,
            outputs,
            summary,
        })
    }

    /// Reads a manifest and checks that every listed output exists.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Manifest {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let manifest = Self::parse(&text, path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for out in &manifest.outputs {
            if !dir.join(out).is_file() {
                return Err(Error::Manifest {
                    path: path.display().to_string(),
                    message: format!("listed output {} does not exist", out.display()),
                });
            }
        }
        Ok(manifest)
    }

    /// Writes `manifest.txt` into the configured output directory.
    pub fn write(&self) -> Result<PathBuf> {
        let path = self.config.output_dir.join(MANIFEST_FILE);
        write_atomic(&path, self.to_text().as_bytes())?;
        Ok(path)
    }
}

//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    FluidFree,
    FluidControlled,
    FlameFree,
    FlameControlled,
    ConvergenceFluid,
    ConvergenceFlame,
    ProjTable,
    SpectrumReport,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::FluidFree,
        Experiment::FluidControlled,
        Experiment::FlameFree,
        Experiment::FlameControlled,
        Experiment::ConvergenceFluid,
        Experiment::ConvergenceFlame,
        Experiment::ProjTable,
        Experiment::SpectrumReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FluidFree => "fluid-free",
            Experiment::FluidControlled => "fluid-controlled",
            Experiment::FlameFree => "flame-free",
            Experiment::FlameControlled => "flame-controlled",
            Experiment::ConvergenceFluid => "convergence-fluid",
            Experiment::ConvergenceFlame => "convergence-flame",
            Experiment::ProjTable => "proj-table",
            Experiment::SpectrumReport => "spectrum-report",
        }
    }

    pub fn is_flame(self) -> bool {
        matches!(
            self,
            Experiment::FlameFree | Experiment::FlameControlled | Experiment::ConvergenceFlame
        )
    }

    pub fn is_controlled(self) -> bool {
        matches!(self, Experiment::FluidControlled | Experiment::FlameControlled)
    }

    pub fn is_trajectory(self) -> bool {
        matches!(
            self,
            Experiment::FluidFree
                | Experiment::FluidControlled
                | Experiment::FlameFree
                | Experiment::FlameControlled
        )
    }

    pub fn is_convergence(self) -> bool {
        matches!(self, Experiment::ConvergenceFluid | Experiment::ConvergenceFlame)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == norm || e.name().replace('-', "") == norm)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub nu2: f64,
    pub nu1: f64,
    pub nu0: f64,
    pub lambda: f64,
    /// Number of actuators.
    pub m: usize,
    /// Actuator volume fraction.
    pub r: f64,
    /// Galerkin modes (level-0 modes for convergence runs).
    pub n: usize,
    pub t: f64,
    pub dt: f64,
    pub x_step: f64,
    /// Time steps between recorded samples.
    pub sample_every: usize,
    pub output_dir: PathBuf,
    /// Refinement levels `0..levels` of a convergence study.
    pub levels: u32,
    /// Largest actuator count of a projection table.
    pub max_m: usize,
    /// Volume fractions of a projection table.
    pub r_values: Vec<f64>,
}

/// Keys accepted in config files and as `--key value` flags, in output order.
pub const KEYS: [&str; 16] = [
    "experiment",
    "nu2",
    "nu1",
    "nu0",
    "lambda",
    "m",
    "r",
    "n",
    "t",
    "dt",
    "x_step",
    "sample_every",
    "output_dir",
    "levels",
    "max_m",
    "r_values",
];

impl ExperimentConfig {
    /// Defaults for `experiment`: the fluid parameter set, with `ν₀ = 10⁻²`
    /// for the flame model and the coarse refinement level for convergence runs.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            nu2: 1e-6,
            nu1: 1e-2,
            nu0: 1.0,
            lambda: 10.0,
            m: 35,
            r: 0.2,
            n: 200,
            t: 1.5,
            dt: 1e-4,
            x_step: 1e-4,
            sample_every: 100,
            output_dir: PathBuf::from("out").join(experiment.name()),
            levels: 4,
            max_m: 128,
            r_values: vec![0.1, 0.2, 0.5],
        };
        if experiment.is_flame() {
            cfg.nu0 = 1e-2;
        }
        if experiment.is_convergence() {
            cfg.n = 50;
            cfg.dt = 1e-4;
            cfg.x_step = 1e-3;
            cfg.t = 0.5;
        }
        cfg
    }

    /// Value of `key` in config-file syntax. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "experiment" => self.experiment.name().to_string(),
            "nu2" => self.nu2.to_string(),
            "nu1" => self.nu1.to_string(),
            "nu0" => self.nu0.to_string(),
            "lambda" => self.lambda.to_string(),
            "m" => self.m.to_string(),
            "r" => self.r.to_string(),
            "n" => self.n.to_string(),
            "t" => self.t.to_string(),
            "dt" => self.dt.to_string(),
            "x_step" => self.x_step.to_string(),
            "sample_every" => self.sample_every.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "levels" => self.levels.to_string(),
            "max_m" => self.max_m.to_string(),
            "r_values" => self
                .r_values
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(","),
            _ => return None,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("cannot parse `{value}` as a value for `{key}`"))
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "nu2" => self.nu2 = num(key, value)?,
            "nu1" => self.nu1 = num(key, value)?,
            "nu0" => self.nu0 = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "t" => self.t = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "x_step" => self.x_step = num(key, value)?,
            "sample_every" => self.sample_every = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "levels" => self.levels = num(key, value)?,
            "max_m" => self.max_m = num(key, value)?,
            "r_values" => {
                self.r_values = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Config-file text listing every key; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).expect("known key"));
            out.push('\n');
        }
        out
    }
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Default,
    Line(usize),
    Flag,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Parses config-file text into `(line, key, value)` triples.
fn parse_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config { line, message: format!("unknown key `{key}`") });
        }
        out.push((line, key, value.trim().to_string()));
    }
    Ok(out)
}

/// Resolves a configuration from config-file text and `--key value` flags.
///
/// Flags override file values; the experiment may come from either. Errors
/// name the line (or `0` for flags) that set the offending value.
pub fn resolve_config(text: &str, flags: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (line, key, value) in parse_lines(text)? {
        entries.insert(key, Entry { value, origin: Origin::Line(line) });
    }
    for (key, value) in flags {
        let key = key.trim_start_matches('-').replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config { line: 0, message: format!("unknown flag `--{key}`") });
        }
        entries.insert(key, Entry { value: value.clone(), origin: Origin::Flag });
    }

    let line_of = |origin: Origin| match origin {
        Origin::Line(l) => l,
        Origin::Flag | Origin::Default => 0,
    };
    let experiment_entry = entries.get("experiment").ok_or_else(|| Error::Config {
        line: 0,
        message: "no experiment given (set `experiment = <name>` or pass --experiment)".into(),
    })?;
    let experiment: Experiment = experiment_entry.value.parse().map_err(|message| Error::Config {
        line: line_of(experiment_entry.origin),
        message,
    })?;

    let mut cfg = ExperimentConfig::defaults(experiment);
    let mut origins: BTreeMap<&str, Origin> = KEYS.iter().map(|&k| (k, Origin::Default)).collect();
    for (key, entry) in &entries {
        cfg.set(key, &entry.value).map_err(|message| Error::Config {
            line: line_of(entry.origin),
            message,
        })?;
        let k = KEYS.iter().find(|&&k| k == key).expect("validated key");
        origins.insert(k, entry.origin);
    }
    validate(&cfg).map_err(|(key, message)| {
        let origin = origins.get(key).copied().unwrap_or(Origin::Default);
        let message = match origin {
            Origin::Flag => format!("--{}: {message}", key.replace('_', "-")),
            Origin::Default => format!("{key} (default): {message}"),
            Origin::Line(_) => format!("{key}: {message}"),
        };
        Error::Config { line: line_of(origin), message }
    })?;
    Ok(cfg)
}

/// Reads `path` (if any) and resolves it together with `flags`.
pub fn parse_config(path: Option<&Path>, flags: &[(String, String)]) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    resolve_config(&text, flags)
}

fn validate(cfg: &ExperimentConfig) -> std::result::Result<(), (&'static str, String)> {
    let positive = |key: &'static str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err((key, format!("must be positive, got {v}")))
        }
    };
    positive("nu2", cfg.nu2)?;
    for (key, v) in [("nu1", cfg.nu1), ("nu0", cfg.nu0)] {
        if !v.is_finite() {
            return Err((key, format!("must be finite, got {v}")));
        }
    }
    positive("lambda", cfg.lambda)?;
    if !(cfg.r > 0.0 && cfg.r < 1.0) {
        return Err(("r", format!("actuator volume fraction must lie in (0, 1), got {}", cfg.r)));
    }
    if let Some(&bad) = cfg.r_values.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(("r_values", format!("every fraction must lie in (0, 1), got {bad}")));
    }
    if cfg.r_values.is_empty() {
        return Err(("r_values", "need at least one fraction".into()));
    }
    positive("t", cfg.t)?;
    positive("dt", cfg.dt)?;
    positive("x_step", cfg.x_step)?;
    let nodes = 1.0 / cfg.x_step;
    if (nodes - nodes.round()).abs() > 1e-9 * nodes {
        return Err(("x_step", format!("1/x_step must be an integer, got {}", cfg.x_step)));
    }
    for (key, v) in [("m", cfg.m), ("n", cfg.n), ("sample_every", cfg.sample_every), ("max_m", cfg.max_m)] {
        if v == 0 {
            return Err((key, "must be at least 1".into()));
        }
    }
    if !(1..=8).contains(&cfg.levels) {
        return Err(("levels", format!("must lie in 1..=8, got {}", cfg.levels)));
    }
    if cfg.experiment.is_controlled() && cfg.m > cfg.n {
        return Err(("m", format!("{} actuators need at least as many modes (n = {})", cfg.m, cfg.n)));
    }
    if cfg.experiment.is_convergence() && cfg.n < 7 {
        return Err(("n", "the manufactured solution needs at least 7 modes".into()));
    }
    let steps = cfg.t / cfg.dt;
    if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
        return Err(("dt", format!("must divide t = {}, got {}", cfg.t, cfg.dt)));
    }
    if cfg.experiment.is_trajectory() || cfg.experiment.is_convergence() {
        let modes = cfg.n << if cfg.experiment.is_convergence() { cfg.levels - 1 } else { 0 };
        let nodes = nodes.round() as usize
            * if cfg.experiment.is_convergence() { 1 << (cfg.levels - 1) } else { 1 };
        if 2 * (modes / 2) >= nodes {
            return Err(("n", format!("{modes} modes alias on a mesh of {nodes} nodes")));
        }
    }
    Ok(())
}

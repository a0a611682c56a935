//! Experiment recipes and their CSV outputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::basis::SpectralBasis;
use crate::error::{Error, Result};
use crate::femgrid::Grid;
use crate::oblique::{min_theta_closed_form, theta_infinity, ObliqueProjector};
use crate::actuation::ActuatorSet;
use crate::solver::{
    convergence_study, fit_decay, run, Discretization, FeedbackConfig, GalerkinState, Horizon,
    ModelKind, ModelParams, Refinement, Trajectory,
};

use super::config::{Experiment, ExperimentConfig};
use super::manifest::{RunManifest, RunStatus};
use super::write_atomic;

/// Snapshot files keep at most this many sample times...
pub const MAX_SNAPSHOT_TIMES: usize = 400;
/// ...and this many mesh points per time.
pub const MAX_SNAPSHOT_POINTS: usize = 1000;

/// Initial target state `1 + |sin(4πx)|`.
pub fn target_initial(x: f64) -> f64 {
    1.0 + (4.0 * PI * x).sin().abs()
}

/// Initial tracked state `cos(2πx)(1 + sin(2πx))`.
pub fn tracked_initial(x: f64) -> f64 {
    (2.0 * PI * x).cos() * (1.0 + (2.0 * PI * x).sin())
}

pub fn model_params(cfg: &ExperimentConfig) -> Result<ModelParams> {
    let kind = if cfg.experiment.is_flame() { ModelKind::Flame } else { ModelKind::Fluid };
    ModelParams::new(kind, cfg.nu2, cfg.nu1, cfg.nu0)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

struct Outputs {
    files: Vec<PathBuf>,
    summary: BTreeMap<String, f64>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new(), summary: BTreeMap::new() }
    }

    fn write(&mut self, cfg: &ExperimentConfig, name: &str, contents: &str) -> Result<()> {
        write_atomic(&cfg.output_dir.join(name), contents.as_bytes())?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }

    fn scalar(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }
}

/// Runs the configured experiment, writes its outputs and manifest into
/// `cfg.output_dir` and returns the manifest.
///
/// A solver blow-up is not an `Err`: it yields a manifest with
/// [`RunStatus::Failed`] and no data files. I/O and parameter errors are returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let started = unix_now();
    let mut outputs = Outputs::new();
    let result = match cfg.experiment {
        Experiment::FluidFree
        | Experiment::FluidControlled
        | Experiment::FlameFree
        | Experiment::FlameControlled => trajectory_experiment(cfg, &mut outputs),
        Experiment::ConvergenceFluid | Experiment::ConvergenceFlame => {
            convergence_experiment(cfg, &mut outputs)
        }
        Experiment::ProjTable => proj_table_experiment(cfg, &mut outputs),
        Experiment::SpectrumReport => spectrum_experiment(cfg, &mut outputs),
    };
    let (status, error) = match result {
        Ok(()) => (RunStatus::Ok, None),
        Err(e @ Error::BlowUp { .. }) => (RunStatus::Failed, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let manifest = RunManifest {
        config: cfg.clone(),
        status,
        error,
        started,
        finished: unix_now(),
        outputs: outputs.files,
        summary: outputs.summary,
    };
    manifest.write()?;
    Ok(manifest)
}

fn trajectory_experiment(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let params = model_params(cfg)?;
    let grid = Grid::build(cfg.x_step)?;
    let disc = Discretization::new(cfg.n, &grid)?;
    let target = GalerkinState::new(0.0, disc.project_fn(target_initial));
    let tracked = GalerkinState::new(0.0, disc.project_fn(tracked_initial));
    let feedback = if cfg.experiment.is_controlled() {
        Some(FeedbackConfig::periodic(cfg.lambda, cfg.m, cfg.r, 1.0, true)?)
    } else {
        None
    };
    let horizon = Horizon { final_time: cfg.t, dt: cfg.dt, sample_every: cfg.sample_every };
    let traj = run(params, disc.clone(), feedback.as_ref(), target, Some(tracked), &horizon)?;

    out.write(cfg, "trajectory.csv", &trajectory_csv(&traj))?;
    out.write(cfg, "snapshots.csv", &snapshots_csv(&traj, &disc))?;
    if cfg.experiment.is_controlled() {
        out.write(cfg, "controls.csv", &controls_csv(&traj, cfg.m))?;
    }

    let (first, last) = (traj.first(), traj.last());
    out.scalar("steps", traj.steps as f64);
    out.scalar("initial_distance", first.l2_distance);
    out.scalar("final_distance", last.l2_distance);
    out.scalar("distance_ratio", last.l2_distance / first.l2_distance);
    out.scalar("initial_v_distance", first.v_distance);
    out.scalar("final_v_distance", last.v_distance);
    out.scalar("initial_mean", first.mean);
    out.scalar("final_mean", last.mean);
    out.scalar(
        "max_abs_u",
        traj.samples.iter().map(|s| s.max_abs_control()).fold(0.0, f64::max),
    );
    if let Ok(fit) = fit_decay(&traj.times(), &traj.l2_distances()) {
        out.scalar("mu", fit.mu);
        out.scalar("decay_c", fit.c);
    }
    Ok(())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,mean,l2_distance,v_distance,max_abs_u,mean_target\n");
    for p in &traj.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.mean),
            fmt_f64(p.l2_distance),
            fmt_f64(p.v_distance),
            fmt_f64(p.max_abs_control()),
            fmt_f64(p.mean_target)
        );
    }
    s
}

/// Evenly spaced indices `0..len` including both ends, at most `max` of them.
pub fn decimate(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    if max == 1 {
        return vec![0];
    }
    (0..max).map(|k| (k * (len - 1) + (max - 1) / 2) / (max - 1)).collect()
}

pub fn snapshots_csv(traj: &Trajectory, disc: &Discretization) -> String {
    let grid = disc.grid();
    let stride = grid.len().div_ceil(MAX_SNAPSHOT_POINTS);
    let points: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    let mut s = String::from("t,x,target,tracked\n");
    for idx in decimate(traj.samples.len(), MAX_SNAPSHOT_TIMES) {
        let sample = &traj.samples[idx];
        let target = disc.transform().synthesize(&sample.target, 0);
        let tracked = sample
            .tracked
            .as_ref()
            .map(|z| disc.transform().synthesize(z, 0))
            .unwrap_or_else(|| target.clone());
        for &n in &points {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_f64(sample.t),
                fmt_f64(grid.node(n)),
                fmt_f64(target[n]),
                fmt_f64(tracked[n])
            );
        }
    }
    s
}

pub fn controls_csv(traj: &Trajectory, count: usize) -> String {
    let mut s = String::from("t");
    for j in 1..=count {
        let _ = write!(s, ",u_{j}");
    }
    s.push('\n');
    for p in &traj.samples {
        s.push_str(&fmt_f64(p.t));
        for j in 0..count {
            s.push(',');
            s.push_str(&fmt_f64(p.controls.get(j).copied().unwrap_or(0.0)));
        }
        s.push('\n');
    }
    s
}

fn convergence_experiment(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let params = model_params(cfg)?;
    let base = Refinement { modes: cfg.n, dt: cfg.dt, x_step: cfg.x_step };
    let levels: Vec<u32> = (0..cfg.levels).collect();
    let study = convergence_study(&params, base, &levels, cfg.t, cfg.sample_every)?;

    let mut table = String::from("rho,n,dt,x_step,max_error,ratio,order\n");
    let mut curves = String::from("rho,t,error\n");
    for row in &study.rows {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            row.level,
            row.modes,
            fmt_f64(row.dt),
            fmt_f64(row.x_step),
            fmt_f64(row.max_error),
            opt(row.ratio),
            opt(row.order())
        );
        for (t, e) in &row.curve {
            let _ = writeln!(curves, "{},{},{}", row.level, fmt_f64(*t), fmt_f64(*e));
        }
        out.scalar(format!("max_error.{}", row.level), row.max_error);
        if let Some(r) = row.ratio {
            out.scalar(format!("ratio.{}", row.level), r);
            out.scalar(format!("order.{}", row.level), r.log2());
        }
    }
    out.write(cfg, "convergence.csv", &table)?;
    out.write(cfg, "convergence_curves.csv", &curves)?;
    Ok(())
}

/// One row of the projection-norm table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjRow {
    pub m: usize,
    pub r: f64,
    pub min_eig_numeric: f64,
    pub min_eig_closed: f64,
    pub norm: f64,
    pub theta_inf: f64,
    /// Largest off-diagonal entry of `Θ` over its largest diagonal entry.
    pub off_diagonal_ratio: f64,
    pub certified: bool,
}

pub fn proj_row(m: usize, r: f64) -> Result<ProjRow> {
    let basis = SpectralBasis::periodic(1.0, m)?;
    let actuators = ActuatorSet::build(m, r, 1.0)?;
    let p = ObliqueProjector::new(&basis, &actuators)?;
    let theta = p.theta_matrix();
    let diag_max = (0..m).map(|i| theta[(i, i)].abs()).fold(0.0, f64::max);
    let mut off: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                off = off.max(theta[(i, j)].abs());
            }
        }
    }
    Ok(ProjRow {
        m,
        r,
        min_eig_numeric: p.theta_min_eigenvalue()?,
        min_eig_closed: min_theta_closed_form(m, r)?,
        norm: p.projection_norm()?,
        theta_inf: theta_infinity(r),
        off_diagonal_ratio: off / diag_max,
        certified: p.certify_direct_sum().ok,
    })
}

pub fn proj_table(max_m: usize, r_values: &[f64]) -> Result<Vec<ProjRow>> {
    let mut rows = Vec::with_capacity(max_m * r_values.len());
    for &r in r_values {
        for m in 1..=max_m {
            rows.push(proj_row(m, r)?);
        }
    }
    Ok(rows)
}

pub fn proj_table_csv(rows: &[ProjRow]) -> String {
    let mut s = String::from("M,r,min_eig_numeric,min_eig_closed,norm,theta_inf\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.m,
            fmt_f64(row.r),
            fmt_f64(row.min_eig_numeric),
            fmt_f64(row.min_eig_closed),
            fmt_f64(row.norm),
            fmt_f64(row.theta_inf)
        );
    }
    s
}

fn proj_table_experiment(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let rows = proj_table(cfg.max_m, &cfg.r_values)?;
    out.write(cfg, "proj_table.csv", &proj_table_csv(&rows))?;
    let gap = rows
        .iter()
        .map(|r| (r.min_eig_numeric - r.min_eig_closed).abs())
        .fold(0.0, f64::max);
    let off = rows.iter().map(|r| r.off_diagonal_ratio).fold(0.0, f64::max);
    let above = rows.iter().all(|r| r.min_eig_numeric > r.theta_inf);
    let certified = rows.iter().all(|r| r.certified);
    out.scalar("rows", rows.len() as f64);
    out.scalar("max_closed_form_gap", gap);
    out.scalar("max_off_diagonal_ratio", off);
    out.scalar("all_above_theta_inf", f64::from(u8::from(above)));
    out.scalar("all_certified", f64::from(u8::from(certified)));
    out.scalar("max_norm", rows.iter().map(|r| r.norm).fold(0.0, f64::max));
    Ok(())
}

/// Text report of the linear spectrum; the first line reads `unstable_modes = K`.
pub fn spectrum_report(params: &ModelParams, modes: usize) -> Result<(String, String, usize)> {
    let basis = SpectralBasis::periodic(1.0, modes)?;
    let unstable = basis.count_unstable_modes(params)?;
    let mut csv = String::from("i,wavenumber,mu,sigma\n");
    let mut text = format!("unstable_modes = {unstable}\n");
    for i in 1..=modes {
        let shape = basis.shape(i)?;
        let mu = basis.laplacian_eigenvalue(i)?;
        let sigma = basis.ks_growth_rate(params, i)?;
        let _ = writeln!(csv, "{i},{},{},{}", fmt_f64(shape.wavenumber()), fmt_f64(mu), fmt_f64(sigma));
        if (unstable.saturating_sub(1)..=unstable + 2).contains(&i) {
            let _ = writeln!(text, "sigma_{i} = {}", fmt_f64(sigma));
        }
    }
    Ok((text, csv, unstable))
}

fn spectrum_experiment(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let params = model_params(cfg)?;
    let (text, csv, unstable) = spectrum_report(&params, cfg.n)?;
    out.write(cfg, "spectrum.txt", &text)?;
    out.write(cfg, "spectrum.csv", &csv)?;
    out.scalar("unstable_modes", unstable as f64);
    let basis = SpectralBasis::periodic(1.0, cfg.n)?;
    for i in [unstable, unstable + 1] {
        if i >= 1 && i <= cfg.n {
            out.scalar(format!("sigma.{i}"), basis.ks_growth_rate(&params, i)?);
        }
    }
    Ok(())
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! Set `KS_STAB_FULL_LADDER=1` to also run the four-level convergence ladder
//! to T = 1.5 (about an hour).

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ks_stab::expcli::experiment::{target_initial, tracked_initial};
use ks_stab::expcli::{run_experiment, Experiment, ExperimentConfig};
use ks_stab::oblique::{center_trig_sums, min_theta_closed_form, theta_infinity};
use ks_stab::solver::{convergence_study, fit_decay, run, Discretization, Horizon, Refinement, Trajectory};
use ks_stab::{ActuatorSet, FeedbackConfig, GalerkinState, Grid, ModelParams, ObliqueProjector, SpectralBasis};

mod common;
use common::{rel, DenseOracle};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn spectrum() -> Verdict {
    let p = ModelParams::fluid_default();
    let basis = SpectralBasis::periodic(1.0, 200).unwrap();
    let unstable = basis.count_unstable_modes(&p).unwrap();
    let s = |i| basis.ks_growth_rate(&p, i).unwrap();
    let (s30, s31, s32, s33) = (s(30), s(31), s(32), s(33));
    let pass = unstable == 31
        && (s30 - 9.9251).abs() <= 1e-3
        && (s31 - 9.9251).abs() <= 1e-3
        && (s32 + 1.0761).abs() <= 1e-3
        && (s33 + 1.0761).abs() <= 1e-3;
    verdict(
        pass,
        format!("unstable={unstable} sigma30={s30:.5} sigma31={s31:.5} sigma32={s32:.5} sigma33={s33:.5}"),
    )
}

fn projection_norms() -> Verdict {
    let (mut worst_off, mut worst_gap, mut worst_margin) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut certified = true;
    for &r in &[0.1, 0.2, 0.5] {
        for m in 1..=128 {
            let p = ObliqueProjector::new(
                &SpectralBasis::periodic(1.0, m).unwrap(),
                &ActuatorSet::build(m, r, 1.0).unwrap(),
            )
            .unwrap();
            let theta = p.theta_matrix();
            let diag_max = theta.diagonal().amax();
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        worst_off = worst_off.max(theta[(i, j)].abs() / diag_max);
                    }
                }
            }
            let min_eig = SymmetricEigen::new(theta).eigenvalues.min();
            worst_gap = worst_gap.max((min_eig - min_theta_closed_form(m, r).unwrap()).abs());
            worst_margin = worst_margin.min(min_eig - theta_infinity(r));
            certified &= p.certify_direct_sum().ok;
        }
    }
    verdict(
        worst_off <= 1e-10 && worst_gap <= 1e-10 && worst_margin > 0.0 && certified,
        format!(
            "max offdiag/diag={worst_off:.2e} max closed-form gap={worst_gap:.2e} \
             min(eig - theta_inf)={worst_margin:.2e} certified={certified}"
        ),
    )
}

fn trig_identities() -> Verdict {
    let mut worst = 0.0f64;
    for count in 2..=256 {
        for m in 1..count {
            let (c, s) = center_trig_sums(count, m);
            worst = worst.max(c.abs()).max(s.abs());
        }
    }
    verdict(worst <= 1e-10, format!("max |sum| over 1 <= m < M <= 256: {worst:.2e}"))
}

fn projection_oracle() -> Verdict {
    let grid = Grid::build(1e-3).unwrap();
    let p = ObliqueProjector::new(
        &SpectralBasis::periodic(1.0, 8).unwrap(),
        &ActuatorSet::build(8, 0.2, 1.0).unwrap(),
    )
    .unwrap();
    let gp = p.on_grid(&grid).unwrap();
    let oracle = DenseOracle::new(8, 0.2, &grid);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut oracle_gap, mut idem, mut kernel, mut range) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let h: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, ph) = gp.apply(&h).unwrap();
        let want = oracle.project(&DVector::from_vec(h.clone()));
        oracle_gap = oracle_gap.max(rel(&ph, want.as_slice()));
        let (_, pph) = gp.apply(&ph).unwrap();
        idem = idem.max(rel(&pph, &ph));
        let residual: Vec<f64> = h.iter().zip(&ph).map(|(a, b)| a - b).collect();
        let scale = gp.moments(&h).unwrap().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for m in gp.moments(&residual).unwrap() {
            kernel = kernel.max(m.abs() / scale);
        }
        let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let combo = gp.actuator_combination(&u);
        let (_, p_combo) = gp.apply(&combo).unwrap();
        range = range.max(rel(&p_combo, &combo));
    }
    verdict(
        oracle_gap <= 1e-6 && idem <= 1e-8 && kernel <= 1e-8 && range <= 1e-8,
        format!("oracle={oracle_gap:.2e} idempotence={idem:.2e} kernel={kernel:.2e} range={range:.2e}"),
    )
}

fn ladder(levels: &[u32], t: f64) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for params in [ModelParams::fluid_default(), ModelParams::flame_default()] {
        let study = convergence_study(&params, Refinement::standard(), levels, t, 100).unwrap();
        let ratios = study.ratios();
        pass &= ratios.iter().all(|r| (3.0..=5.0).contains(r));
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
        parts.push(format!("{} ratios [{}]", params.kind.name(), shown.join(", ")));
    }
    (pass, parts.join("; "))
}

fn convergence() -> Verdict {
    let (pass, detail) = ladder(&[0, 1, 2], 0.5);
    verdict(pass, format!("T=0.5 levels 0..2: {detail}"))
}

fn convergence_full() -> Verdict {
    let (pass, detail) = ladder(&[0, 1, 2, 3], 1.5);
    verdict(pass, format!("T=1.5 levels 0..3: {detail}"))
}

fn trajectory(params: ModelParams, controlled: bool, n: usize, dt: f64, t: f64) -> Trajectory {
    let disc = Discretization::new(n, &Grid::build(1e-4).unwrap()).unwrap();
    let target = GalerkinState::new(0.0, disc.project_fn(target_initial));
    let tracked = GalerkinState::new(0.0, disc.project_fn(tracked_initial));
    let feedback = FeedbackConfig::periodic(10.0, 35, 0.2, 1.0, true).unwrap();
    let horizon = Horizon { final_time: t, dt, sample_every: ((0.01 / dt).round() as usize).max(1) };
    let fb = if controlled { Some(&feedback) } else { None };
    run(params, disc, fb, target, Some(tracked), &horizon).unwrap()
}

struct FullRuns {
    fluid_free: Trajectory,
    flame_free: Trajectory,
}

fn stabilization() -> (Verdict, FullRuns) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut free = Vec::new();
    for params in [ModelParams::fluid_default(), ModelParams::flame_default()] {
        let name = params.kind.name();
        let on = trajectory(params, true, 200, 1e-4, 1.5);
        let d = on.l2_distances();
        let ratio = d[d.len() - 1] / d[0];
        let mu = fit_decay(&on.times(), &d).map(|f| f.mu).unwrap_or(f64::NAN);
        pass &= ratio <= 1e-2 && mu > 0.0;
        parts.push(format!("{name} controlled ratio={ratio:.2e} mu={mu:.3}"));

        let off = trajectory(params, false, 200, 1e-4, 1.5);
        let d = off.l2_distances();
        let lowest = d.iter().fold(f64::INFINITY, |a, &v| a.min(v)) / d[0];
        pass &= lowest >= 1e-1;
        parts.push(format!("{name} free min ratio={lowest:.2e}"));
        free.push(off);

        // Desk variant: distances every 0.05 time units must fall strictly.
        let desk = trajectory(params, true, 128, 1e-3, 0.75);
        let d = desk.l2_distances();
        let coarse: Vec<f64> = d.iter().step_by(5).copied().collect();
        let monotone = coarse.windows(2).all(|w| w[1] < w[0]);
        let mu = fit_decay(&desk.times(), &d).map(|f| f.mu).unwrap_or(f64::NAN);
        pass &= monotone && mu > 0.0;
        parts.push(format!("{name} desk monotone={monotone} mu={mu:.3}"));
    }
    let flame_free = free.pop().unwrap();
    let fluid_free = free.pop().unwrap();
    (verdict(pass, parts.join("; ")), FullRuns { fluid_free, flame_free })
}

fn conservation(runs: &FullRuns) -> Verdict {
    let within = |t: f64| t <= 0.5 + 1e-9;
    let fluid = &runs.fluid_free.samples;
    let m0 = fluid[0].mean;
    let drift = fluid.iter().filter(|s| within(s.t)).fold(0.0f64, |a, s| a.max((s.mean - m0).abs()));
    let flame: Vec<f64> = runs.flame_free.samples.iter().filter(|s| within(s.t)).map(|s| s.mean).collect();
    let rises = flame.windows(2).filter(|w| w[1] > w[0]).count();
    let fell = flame[0] - flame[flame.len() - 1];
    verdict(
        drift <= 1e-8 && rises == 0 && fell > 0.0,
        format!("fluid mean drift={drift:.2e}; flame mean increases={rises} total decrease={fell:.3e}"),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for e in Experiment::ALL {
        let mut cfg = ExperimentConfig::defaults(e);
        if e.is_trajectory() {
            cfg.n = 128;
            cfg.t = 0.05;
            cfg.dt = 1e-3;
            cfg.x_step = 1e-3;
            cfg.sample_every = 5;
        } else if e.is_convergence() {
            cfg.t = 0.05;
            cfg.levels = 2;
        } else if e == Experiment::ProjTable {
            cfg.max_m = 32;
        }
        let mut outputs = Vec::new();
        for run_id in ["a", "b"] {
            cfg.output_dir = tmp.path().join(e.name()).join(run_id);
            run_experiment(&cfg).unwrap();
            outputs.push(csv_files(&cfg.output_dir));
        }
        compared += outputs[0].len();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            mismatched.push(e.name());
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("{compared} CSV files across {} experiments; mismatched: {mismatched:?}", Experiment::ALL.len()),
    )
}

fn report(id: &str, title: &str, started: Instant, v: &Verdict) {
    println!(
        "criterion {id} [{}] {title}: {} ({:.1} s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        started.elapsed().as_secs_f64()
    );
}

fn main() -> ExitCode {
    let mut all = true;
    let mut check = |id: &str, title: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        report(id, title, start, &v);
        all &= v.pass;
    };
    check("1", "spectrum", &mut spectrum);
    check("2", "projection norms", &mut projection_norms);
    check("3", "trig identities", &mut trig_identities);
    check("4", "projection oracle", &mut projection_oracle);
    check("5", "manufactured-solution convergence", &mut convergence);
    if std::env::var("KS_STAB_FULL_LADDER").is_ok_and(|v| v == "1") {
        check("5", "full ladder", &mut convergence_full);
    }
    let mut runs = None;
    check("6", "stabilization", &mut || {
        let (v, r) = stabilization();
        runs = Some(r);
        v
    });
    let runs = runs.unwrap();
    check("7", "structural conservation", &mut || conservation(&runs));
    check("8", "determinism", &mut determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

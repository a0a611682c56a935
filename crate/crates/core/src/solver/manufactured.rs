//! Manufactured solution and the refinement study built on it.
//!
//! `y_ex(t, x) = 3 + 2t/(t+1) + 10cos²(4t)cos(6πx) + (3t+2)²e^{-2t}sin(2πx)`,
//! a combination of three eigenfunctions. At `t = 0` it equals
//! `3 + 10cos(6πx) + 4sin(2πx)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::femgrid::Grid;

use super::diagnostics::l2_norm;
use super::galerkin::Discretization;
use super::integrator::Integrator;
use super::{Forcing, GalerkinState, ModelParams};

/// Mode slots (1-based) of the three components on `[0, 1)`.
const CONST_SLOT: usize = 1;
const SIN_2PI_SLOT: usize = 2;
const COS_6PI_SLOT: usize = 7;

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolution;

impl ExactSolution {
    /// Time-dependent amplitudes `(a, b, c)` of `1`, `cos(6πx)`, `sin(2πx)`.
    pub fn amplitudes(t: f64) -> (f64, f64, f64) {
        let a = 3.0 + 2.0 * t / (t + 1.0);
        let b = 10.0 * (4.0 * t).cos().powi(2);
        let c = (3.0 * t + 2.0).powi(2) * (-2.0 * t).exp();
        (a, b, c)
    }

    pub fn amplitude_rates(t: f64) -> (f64, f64, f64) {
        let a = 2.0 / (t + 1.0).powi(2);
        let b = -40.0 * (8.0 * t).sin();
        let e = (-2.0 * t).exp();
        let c = 6.0 * (3.0 * t + 2.0) * e - 2.0 * (3.0 * t + 2.0).powi(2) * e;
        (a, b, c)
    }

    pub fn value(t: f64, x: f64) -> f64 {
        Self::space_derivative(t, x, 0)
    }

    /// `∂ₓᵏ y_ex`.
    pub fn space_derivative(t: f64, x: f64, order: u32) -> f64 {
        let (a, b, c) = Self::amplitudes(t);
        let shift = f64::from(order) * 0.5 * PI;
        let (k6, k2) = (6.0 * PI, 2.0 * PI);
        let constant = if order == 0 { a } else { 0.0 };
        constant
            + b * k6.powi(order as i32) * (k6 * x + shift).cos()
            + c * k2.powi(order as i32) * (k2 * x + shift).sin()
    }

    pub fn time_derivative(t: f64, x: f64) -> f64 {
        let (a, b, c) = Self::amplitude_rates(t);
        a + b * (6.0 * PI * x).cos() + c * (2.0 * PI * x).sin()
    }

    /// Galerkin coefficients in the periodic basis on `[0, 1)`; needs at least 7 modes.
    pub fn coefficients(t: f64, modes: usize) -> Result<Vec<f64>> {
        if modes < COS_6PI_SLOT {
            return Err(Error::InvalidParameter(format!(
                "the manufactured solution needs at least {COS_6PI_SLOT} modes, got {modes}"
            )));
        }
        let (a, b, c) = Self::amplitudes(t);
        let mut z = vec![0.0; modes];
        z[CONST_SLOT - 1] = a;
        z[SIN_2PI_SLOT - 1] = c;
        z[COS_6PI_SLOT - 1] = b;
        Ok(z)
    }
}

pub fn exact_solution(t: f64, x: f64) -> f64 {
    ExactSolution::value(t, x)
}

/// `f = ∂ₜy_ex + ν₂∂ₓ⁴y_ex + ν₁∂ₓ²y_ex + ν₀𝒩(y_ex)`.
pub fn manufactured_forcing(params: &ModelParams, t: f64, x: f64) -> f64 {
    let y = ExactSolution::value(t, x);
    let yx = ExactSolution::space_derivative(t, x, 1);
    ExactSolution::time_derivative(t, x)
        + params.nu2 * ExactSolution::space_derivative(t, x, 4)
        + params.nu1 * ExactSolution::space_derivative(t, x, 2)
        + params.nu0 * params.kind.pointwise(y, yx)
}

/// Base discretization of a refinement ladder; level `ρ` uses
/// `(modes·2^ρ, dt/2^ρ, x_step/2^ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub modes: usize,
    pub dt: f64,
    pub x_step: f64,
}

impl Refinement {
    /// `N₀ = 50, dt₀ = 10⁻⁴, x_step₀ = 10⁻³`.
    pub fn standard() -> Self {
        Self { modes: 50, dt: 1e-4, x_step: 1e-3 }
    }

    pub fn level(&self, rho: u32) -> Self {
        let f = 2f64.powi(rho as i32);
        Self { modes: self.modes << rho, dt: self.dt / f, x_step: self.x_step / f }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub modes: usize,
    pub dt: f64,
    pub x_step: f64,
    /// `max_t ‖z(t) - y_ex(t)‖_{L²}`.
    pub max_error: f64,
    /// Previous level's error divided by this one.
    pub ratio: Option<f64>,
    /// `(t, error)` at the common sampling times.
    pub curve: Vec<(f64, f64)>,
}

impl ConvergenceRow {
    pub fn order(&self) -> Option<f64> {
        self.ratio.map(f64::log2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio).collect()
    }
}

/// Runs the free dynamics with manufactured forcing from `y_ex(0, ·)` on every
/// level, concurrently. `sample_every` counts level-0 steps between recorded
/// error samples.
/// Maximum error and `(t, error)` curve of one level.
type LevelResult = (f64, Vec<(f64, f64)>);

pub fn convergence_study(
    params: &ModelParams,
    base: Refinement,
    levels: &[u32],
    final_time: f64,
    sample_every: usize,
) -> Result<ConvergenceStudy> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("at least one refinement level is required".into()));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    let params = params.with_forcing(Forcing::Manufactured);
    let results: Vec<Result<LevelResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&rho| {
                let level = base.level(rho);
                let every = sample_every << rho;
                scope.spawn(move || run_level(&params, level, final_time, every))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("refinement level panicked"))
            .collect()
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (&rho, result) in levels.iter().zip(results) {
        let (max_error, curve) = result?;
        let level = base.level(rho);
        let ratio = rows.last().map(|prev| prev.max_error / max_error);
        rows.push(ConvergenceRow {
            level: rho,
            modes: level.modes,
            dt: level.dt,
            x_step: level.x_step,
            max_error,
            ratio,
            curve,
        });
    }
    Ok(ConvergenceStudy { rows })
}

fn run_level(params: &ModelParams, level: Refinement, final_time: f64, sample_every: usize) -> Result<(f64, Vec<(f64, f64)>)> {
    let grid = Grid::build(level.x_step)?;
    let disc = Discretization::new(level.modes, &grid)?;
    let z0 = disc.project_fn(|x| ExactSolution::value(0.0, x));
    let steps = super::integrator::Horizon { final_time, dt: level.dt, sample_every }.steps()?;
    let mut integrator = Integrator::new(*params, disc, None, GalerkinState::new(0.0, z0), None, level.dt)?;
    let error = |it: &Integrator| -> Result<f64> {
        let exact = ExactSolution::coefficients(it.time(), level.modes)?;
        let diff: Vec<f64> = it.target().z.iter().zip(&exact).map(|(a, b)| a - b).collect();
        Ok(l2_norm(&diff, it.discretization()))
    };
    let mut max_error: f64 = error(&integrator)?;
    let mut curve = vec![(0.0, max_error)];
    for k in 1..=steps {
        integrator.step()?;
        let e = error(&integrator)?;
        max_error = max_error.max(e);
        if k % sample_every == 0 || k == steps {
            curve.push((integrator.time(), e));
        }
    }
    Ok((max_error, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ModelKind;

    #[test]
    fn initial_profile() {
        for &x in &[0.0, 0.1, 0.37, 0.9] {
            let want = 3.0 + 10.0 * (6.0 * PI * x).cos() + 4.0 * (2.0 * PI * x).sin();
            assert!((exact_solution(0.0, x) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn time_derivative_matches_finite_difference() {
        let h = 1e-5;
        for &t in &[0.01, 0.3, 1.2] {
            for &x in &[0.05, 0.5, 0.77] {
                let fd = (exact_solution(t + h, x) - exact_solution(t - h, x)) / (2.0 * h);
                assert!((fd - ExactSolution::time_derivative(t, x)).abs() < 1e-6);
            }
        }
        assert_eq!(ExactSolution::amplitude_rates(0.0).0, 2.0);
    }

    #[test]
    fn space_derivatives_match_finite_differences() {
        let h = 1e-4;
        let (t, x) = (0.4, 0.31);
        for order in 0..4 {
            let f = |x| ExactSolution::space_derivative(t, x, order);
            let fd = (f(x + h) - f(x - h)) / (2.0 * h);
            let exact = ExactSolution::space_derivative(t, x, order + 1);
            assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "order {order}");
        }
    }

    #[test]
    fn coefficients_reproduce_values() {
        let grid = Grid::with_nodes(1.0, 200).unwrap();
        let disc = Discretization::new(12, &grid).unwrap();
        let z = ExactSolution::coefficients(0.7, 12).unwrap();
        let v = disc.transform().synthesize(&z, 0);
        for (n, val) in v.iter().enumerate() {
            assert!((val - exact_solution(0.7, grid.node(n))).abs() < 1e-12);
        }
        assert!(ExactSolution::coefficients(0.0, 6).is_err());
    }

    #[test]
    fn linear_forcing_reduces_to_residual() {
        let p = ModelParams::new(ModelKind::Fluid, 1e-6, 1e-2, 0.0).unwrap();
        let (t, x) = (0.2, 0.6);
        let want = ExactSolution::time_derivative(t, x)
            + 1e-6 * ExactSolution::space_derivative(t, x, 4)
            + 1e-2 * ExactSolution::space_derivative(t, x, 2);
        assert_eq!(manufactured_forcing(&p, t, x), want);
    }

    #[test]
    fn refinement_ladder() {
        let base = Refinement::standard();
        let l3 = base.level(3);
        assert_eq!(l3.modes, 400);
        assert!((l3.dt - 1.25e-5).abs() < 1e-20);
        assert!((l3.x_step - 1.25e-4).abs() < 1e-18);
    }
}

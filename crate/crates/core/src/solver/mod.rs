//! Spectral-Galerkin solver for the Kuramoto–Sivashinsky models
//!
//! ```text
//! ∂ₜy + ν₂∂ₓ⁴y + ν₁∂ₓ²y + ν₀𝒩(y) = Σ u_j 1_{ω_j} + f
//! ```
//!
//! with `𝒩(y) = ½|∂ₓy|²` (flame) or `𝒩(y) = y∂ₓy` (fluid), on a periodic
//! interval. The state is expanded in the first `N` eigenfunctions; the
//! nonlinearity is evaluated at the mesh nodes and projected back with the
//! mass matrix. Time stepping is Crank–Nicolson for the linear part and the
//! forcing, two-step Adams–Bashforth for the nonlinearity and the feedback.

mod diagnostics;
mod feedback;
mod galerkin;
mod integrator;
mod manufactured;

pub use diagnostics::{fit_decay, l2_norm, v_norm, DecayFit};
pub use feedback::{feedback_control, FeedbackConfig, FeedbackLaw};
pub use galerkin::{eval_state_on_grid, nonlinearity, Discretization};
pub use integrator::{run, Horizon, Integrator, Sample, StepTerms, Trajectory, BLOW_UP_LIMIT};
pub use manufactured::{
    convergence_study, exact_solution, manufactured_forcing, ConvergenceRow, ConvergenceStudy,
    ExactSolution, Refinement,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Scalar flame-front model, `𝒩(y) = ½|∂ₓy|²`.
    Flame,
    /// Fluid model, `𝒩(y) = y∂ₓy`.
    Fluid,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Flame => "flame",
            ModelKind::Fluid => "fluid",
        }
    }

    /// Pointwise `𝒩` from nodal values of `y` and `∂ₓy`.
    pub fn pointwise(self, value: f64, slope: f64) -> f64 {
        match self {
            ModelKind::Flame => 0.5 * slope * slope,
            ModelKind::Fluid => value * slope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    Zero,
    /// Forcing that makes [`ExactSolution`] solve the free dynamics.
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub nu2: f64,
    pub nu1: f64,
    pub nu0: f64,
    pub forcing: Forcing,
}

impl ModelParams {
    pub fn new(kind: ModelKind, nu2: f64, nu1: f64, nu0: f64) -> Result<Self> {
        if !(nu2.is_finite() && nu2 > 0.0) {
            return Err(Error::InvalidParameter(format!("nu2 must be positive, got {nu2}")));
        }
        if !(nu1.is_finite() && nu0.is_finite()) {
            return Err(Error::InvalidParameter("nu1 and nu0 must be finite".into()));
        }
        Ok(Self { kind, nu2, nu1, nu0, forcing: Forcing::Zero })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    /// `ν₂ = 10⁻⁶, ν₁ = 10⁻², ν₀ = 1`.
    pub fn fluid_default() -> Self {
        Self::new(ModelKind::Fluid, 1e-6, 1e-2, 1.0).expect("valid defaults")
    }

    /// Fluid defaults with `ν₀ = 10⁻²`.
    pub fn flame_default() -> Self {
        Self::new(ModelKind::Flame, 1e-6, 1e-2, 1e-2).expect("valid defaults")
    }

    /// Linear symbol `g = ν₂μ² - ν₁μ` for a Laplacian eigenvalue `μ`.
    pub fn linear_symbol(&self, mu: f64) -> f64 {
        self.nu2 * mu * mu - self.nu1 * mu
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    pub t: f64,
    pub z: Vec<f64>,
}

impl GalerkinState {
    pub fn new(t: f64, z: Vec<f64>) -> Self {
        Self { t, z }
    }

    pub fn zeros(modes: usize) -> Self {
        Self { t: 0.0, z: vec![0.0; modes] }
    }

    pub fn modes(&self) -> usize {
        self.z.len()
    }

    /// Spatial mean; only the constant mode contributes.
    pub fn mean(&self) -> f64 {
        self.z[0]
    }
}

//! The oblique-projection feedback
//!
//! ```text
//! Σ u_j 1_{ω_j} = P (ν₁∂ₓ²y + ν₀(𝒩(ỹ) - 𝒩(ŷ)) - λy),   y = ỹ - ŷ
//! ```
//!
//! where `P` projects onto the actuators along the orthogonal complement of
//! the first `M` eigenfunctions.

use nalgebra::{DMatrix, DVector};

use crate::basis::BoundaryKind;
use crate::error::{Error, Result};
use crate::oblique::{mode_actuator_products, ObliqueProjector};

use super::galerkin::Discretization;
use super::{GalerkinState, ModelParams};

#[derive(Debug, Clone)]
pub struct FeedbackConfig {
    /// Shift gain `λ > 0`.
    pub lambda: f64,
    pub projector: ObliqueProjector,
    /// `C_feed`: when false the tracked state evolves freely.
    pub enabled: bool,
}

impl FeedbackConfig {
    pub fn new(lambda: f64, projector: ObliqueProjector, enabled: bool) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if projector.basis().bc() != BoundaryKind::Periodic {
            return Err(Error::InvalidParameter("feedback requires a periodic projector".into()));
        }
        Ok(Self { lambda, projector, enabled })
    }

    /// Periodic projector with `count` actuators covering a fraction `r` of `[0, length)`.
    pub fn periodic(lambda: f64, count: usize, fraction: f64, length: f64, enabled: bool) -> Result<Self> {
        let basis = crate::basis::SpectralBasis::periodic(length, count)?;
        let actuators = crate::actuation::ActuatorSet::build(count, fraction, length)?;
        Self::new(lambda, ObliqueProjector::new(&basis, &actuators)?, enabled)
    }
}

/// A [`FeedbackConfig`] bound to a discretization.
#[derive(Debug, Clone)]
pub struct FeedbackLaw {
    config: FeedbackConfig,
    /// Galerkin coefficients of each actuator: `(e_n, 1_{ω_j}) / ‖e_n‖²`.
    actuator_modes: DMatrix<f64>,
}

impl FeedbackLaw {
    pub fn new(config: &FeedbackConfig, disc: &Discretization) -> Result<Self> {
        let length = disc.grid().length();
        if (config.projector.basis().length() - length).abs() > 1e-12 * length {
            return Err(Error::InvalidParameter(format!(
                "projector domain length {} differs from solver length {length}",
                config.projector.basis().length()
            )));
        }
        if config.projector.count() > disc.modes() {
            return Err(Error::InvalidParameter(format!(
                "{} actuators need at least as many Galerkin modes, got {}",
                config.projector.count(),
                disc.modes()
            )));
        }
        let mut actuator_modes =
            mode_actuator_products(disc.basis(), config.projector.actuators(), disc.modes())?;
        for (n, mut row) in actuator_modes.row_iter_mut().enumerate() {
            row /= disc.norms()[n];
        }
        Ok(Self { config: config.clone(), actuator_modes })
    }

    pub fn config(&self) -> &FeedbackConfig {
        &self.config
    }

    pub fn count(&self) -> usize {
        self.config.projector.count()
    }

    /// Feedback from pointwise nonlinearities already evaluated for both states.
    /// Returns the amplitudes `u` and the Galerkin coefficients of `Σ u_j 1_{ω_j}`.
    pub(crate) fn evaluate(
        &self,
        params: &ModelParams,
        disc: &Discretization,
        tilde: &[f64],
        hat: &[f64],
        nonlinear_tilde: &[f64],
        nonlinear_hat: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let lambda = self.config.lambda;
        let linear: Vec<f64> = tilde
            .iter()
            .zip(hat)
            .zip(disc.eigenvalues())
            .map(|((a, b), mu)| {
                let y = a - b;
                -params.nu1 * mu * y - lambda * y
            })
            .collect();
        let mut argument = disc.transform().synthesize(&linear, 0);
        for ((v, nt), nh) in argument.iter_mut().zip(nonlinear_tilde).zip(nonlinear_hat) {
            *v += params.nu0 * (nt - nh);
        }
        let moments = disc.transform().inner_products(&argument);
        let u = self.config.projector.amplitudes(&moments[..self.count()])?;
        let coeffs = &self.actuator_modes * DVector::from_column_slice(&u);
        Ok((u, coeffs.iter().copied().collect()))
    }
}

/// Feedback control for the pair `(ỹ, ŷ)`: amplitudes `u` and the Galerkin
/// coefficients of `Σ u_j 1_{ω_j}`.
pub fn feedback_control(
    config: &FeedbackConfig,
    params: &ModelParams,
    tilde: &GalerkinState,
    hat: &GalerkinState,
    disc: &Discretization,
) -> Result<(Vec<f64>, Vec<f64>)> {
    disc.check_state(&tilde.z)?;
    disc.check_state(&hat.z)?;
    let law = FeedbackLaw::new(config, disc)?;
    let nt = disc.pointwise_nonlinearity(params, &tilde.z);
    let nh = disc.pointwise_nonlinearity(params, &hat.z);
    law.evaluate(params, disc, &tilde.z, &hat.z, &nt, &nh)
}

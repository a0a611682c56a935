use crate::basis::SpectralBasis;
use crate::error::{Error, Result};
use crate::femgrid::{Grid, PeriodicTransform};

use super::{GalerkinState, ModelParams};

/// Basis, mesh and transform shared by every state of a run.
#[derive(Debug, Clone)]
pub struct Discretization {
    basis: SpectralBasis,
    transform: PeriodicTransform,
    eigenvalues: Vec<f64>,
    norms: Vec<f64>,
}

impl Discretization {
    pub fn new(modes: usize, grid: &Grid) -> Result<Self> {
        let basis = SpectralBasis::periodic(grid.length(), modes)?;
        let transform = PeriodicTransform::new(grid, &basis)?;
        let eigenvalues = (1..=modes).map(|i| basis.laplacian_eigenvalue_unchecked(i)).collect();
        let norms = (1..=modes).map(|i| basis.norm_squared_unchecked(i)).collect();
        Ok(Self { basis, transform, eigenvalues, norms })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn grid(&self) -> &Grid {
        self.transform.grid()
    }

    pub fn transform(&self) -> &PeriodicTransform {
        &self.transform
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    /// `μ_n` for every mode.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Exact `‖e_n‖²` for every mode.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub(crate) fn check_state(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.modes() {
            return Err(Error::LengthMismatch { expected: self.modes(), got: z.len() });
        }
        Ok(())
    }

    /// Galerkin coefficients of a function sampled at the nodes.
    pub fn project(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.grid().len() {
            return Err(Error::LengthMismatch { expected: self.grid().len(), got: values.len() });
        }
        Ok(self.transform.analyze(values))
    }

    /// Galerkin coefficients of `f`, sampled at the nodes.
    pub fn project_fn(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.transform.analyze(&self.grid().sample(f))
    }

    /// Pointwise `𝒩` of a state (without the `ν₀` factor).
    pub(crate) fn pointwise_nonlinearity(&self, params: &ModelParams, z: &[f64]) -> Vec<f64> {
        let slope = self.transform.synthesize(z, 1);
        match params.kind {
            super::ModelKind::Flame => slope.iter().map(|s| 0.5 * s * s).collect(),
            super::ModelKind::Fluid => {
                let value = self.transform.synthesize(z, 0);
                value.iter().zip(&slope).map(|(v, s)| v * s).collect()
            }
        }
    }
}

/// `Σ z_n dᵏe_n/dxᵏ` at the mesh nodes, `k <= 2`.
pub fn eval_state_on_grid(state: &GalerkinState, disc: &Discretization, derivative_order: u32) -> Result<Vec<f64>> {
    disc.check_state(&state.z)?;
    if derivative_order > 2 {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 0, 1 or 2, got {derivative_order}"
        )));
    }
    Ok(disc.transform.synthesize(&state.z, derivative_order))
}

/// Galerkin coefficients of `ν₀ P_{E_N} 𝒩(z)`.
pub fn nonlinearity(params: &ModelParams, state: &GalerkinState, disc: &Discretization) -> Result<Vec<f64>> {
    disc.check_state(&state.z)?;
    let mut pointwise = disc.pointwise_nonlinearity(params, &state.z);
    for v in pointwise.iter_mut() {
        *v *= params.nu0;
    }
    Ok(disc.transform.analyze(&pointwise))
}

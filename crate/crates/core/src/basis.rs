//! Laplacian eigenfunctions on `[0, L)` and the linear Kuramoto–Sivashinsky
//! spectrum.
//!
//! Modes are indexed from 1. For periodic boundary conditions the ordering is
//! `1 -> 1`, `2 -> sin(2πx/L)`, `3 -> cos(2πx/L)`, `4 -> sin(4πx/L)`, ... so
//! the two functions sharing an eigenvalue sit next to each other. Dirichlet
//! modes are `sin(iπx/L)` and Neumann modes `cos((i-1)πx/L)`.
//!
//! Eigenfunctions are *unnormalized*: `‖e_i‖² = L` for a constant mode and
//! `L/2` otherwise. Galerkin coefficients throughout the crate are stored
//! against these functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::solver::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    Neumann,
}

/// Shape of a single eigenfunction: `1`, `sin(kx)` or `cos(kx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeShape {
    Constant,
    Sin(f64),
    Cos(f64),
}

impl ModeShape {
    pub fn wavenumber(self) -> f64 {
        match self {
            ModeShape::Constant => 0.0,
            ModeShape::Sin(k) | ModeShape::Cos(k) => k,
        }
    }

    /// `d^order/dx^order` of the shape at `x`.
    pub fn derivative(self, x: f64, order: u32) -> f64 {
        let shift = f64::from(order) * 0.5 * PI;
        match self {
            ModeShape::Constant => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            ModeShape::Sin(k) => k.powi(order as i32) * (k * x + shift).sin(),
            ModeShape::Cos(k) => k.powi(order as i32) * (k * x + shift).cos(),
        }
    }

    /// Exact integral over `(center - half_width, center + half_width)`.
    pub fn integral(self, center: f64, half_width: f64) -> f64 {
        match self {
            ModeShape::Constant => 2.0 * half_width,
            ModeShape::Sin(0.0) => 0.0,
            ModeShape::Cos(0.0) => 2.0 * half_width,
            ModeShape::Sin(k) => 2.0 * (k * center).sin() * (k * half_width).sin() / k,
            ModeShape::Cos(k) => 2.0 * (k * center).cos() * (k * half_width).sin() / k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBasis {
    bc: BoundaryKind,
    length: f64,
    modes: usize,
}

impl SpectralBasis {
    pub fn new(bc: BoundaryKind, length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if modes == 0 {
            return Err(Error::InvalidParameter("basis needs at least one mode".into()));
        }
        Ok(Self { bc, length, modes })
    }

    pub fn periodic(length: f64, modes: usize) -> Result<Self> {
        Self::new(BoundaryKind::Periodic, length, modes)
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Same family and domain, different truncation.
    pub fn truncated(&self, modes: usize) -> Result<Self> {
        Self::new(self.bc, self.length, modes)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.modes {
            return Err(Error::ModeIndex { index: i, modes: self.modes });
        }
        Ok(())
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !(0.0..self.length).contains(&x) {
            return Err(Error::OutsideDomain { x, length: self.length });
        }
        Ok(())
    }

    pub fn shape(&self, i: usize) -> Result<ModeShape> {
        self.check_index(i)?;
        Ok(self.shape_unchecked(i))
    }

    pub(crate) fn shape_unchecked(&self, i: usize) -> ModeShape {
        let l = self.length;
        match self.bc {
            BoundaryKind::Periodic => {
                if i == 1 {
                    ModeShape::Constant
                } else if i.is_multiple_of(2) {
                    ModeShape::Sin(i as f64 * PI / l)
                } else {
                    ModeShape::Cos((i - 1) as f64 * PI / l)
                }
            }
            BoundaryKind::Dirichlet => ModeShape::Sin(i as f64 * PI / l),
            BoundaryKind::Neumann => {
                if i == 1 {
                    ModeShape::Constant
                } else {
                    ModeShape::Cos((i - 1) as f64 * PI / l)
                }
            }
        }
    }

    pub fn eval_eigenfunction(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        self.check_point(x)?;
        Ok(self.shape_unchecked(i).derivative(x, 0))
    }

    /// Eigenfunction scaled to unit L² norm.
    pub fn eval_normalized_eigenfunction(&self, i: usize, x: f64) -> Result<f64> {
        let value = self.eval_eigenfunction(i, x)?;
        Ok(value / self.norm_squared_unchecked(i).sqrt())
    }

    pub fn eval_derivative(&self, i: usize, x: f64, order: u32) -> Result<f64> {
        self.check_index(i)?;
        self.check_point(x)?;
        Ok(self.shape_unchecked(i).derivative(x, order))
    }

    /// Exact `‖e_i‖²_{L²(0,L)}`.
    pub fn norm_squared(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.norm_squared_unchecked(i))
    }

    pub(crate) fn norm_squared_unchecked(&self, i: usize) -> f64 {
        match self.shape_unchecked(i) {
            ModeShape::Constant => self.length,
            _ => 0.5 * self.length,
        }
    }

    /// Eigenvalue `μ_i` of `-Δ`, from the closed form.
    pub fn laplacian_eigenvalue(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.laplacian_eigenvalue_unchecked(i))
    }

    pub(crate) fn laplacian_eigenvalue_unchecked(&self, i: usize) -> f64 {
        self.shape_unchecked(i).wavenumber().powi(2)
    }

    /// Linear growth rate `σ_i = -ν₂μ_i² + ν₁μ_i` of mode `i`.
    pub fn ks_growth_rate(&self, params: &ModelParams, i: usize) -> Result<f64> {
        let mu = self.laplacian_eigenvalue(i)?;
        Ok(growth_rate(params, mu))
    }

    /// Number of modes with `σ_i >= 0`. Fails if the last mode is not stable,
    /// since then the basis is too short to contain the whole unstable set.
    pub fn count_unstable_modes(&self, params: &ModelParams) -> Result<usize> {
        let last = self.ks_growth_rate(params, self.modes)?;
        if last >= 0.0 {
            return Err(Error::SpectrumNotBracketed { modes: self.modes, rate: last });
        }
        Ok((1..=self.modes)
            .filter(|&i| growth_rate(params, self.laplacian_eigenvalue_unchecked(i)) >= 0.0)
            .count())
    }
}

fn growth_rate(params: &ModelParams, mu: f64) -> f64 {
    -params.nu2 * mu * mu + params.nu1 * mu
}

//! Oblique-projection feedback stabilization of the one-dimensional
//! Kuramoto–Sivashinsky equation.
//!
//! The crate is split along the numerical pipeline:
//!
//! - [`basis`]: Laplacian eigenfunctions on an interval (periodic, Dirichlet,
//!   Neumann), their eigenvalues and the linear Kuramoto–Sivashinsky growth rates.
//! - [`actuation`]: indicator-function actuators on evenly spaced subintervals.
//! - [`oblique`]: eigenfunction/actuator Gram matrices, the oblique projection
//!   onto the actuator span along the orthogonal complement of the leading
//!   eigenfunctions, and its operator norm.
//! - [`femgrid`]: the uniform periodic mesh, the piecewise-linear mass matrix
//!   and the quadrature used to project grid functions onto modes.
//! - [`solver`]: the spectral-Galerkin Crank–Nicolson/Adams–Bashforth
//!   integrator for the flame and fluid models, with and without feedback.
//! - [`expcli`]: experiment recipes, configuration, CSV/manifest output.

pub mod actuation;
pub mod basis;
pub mod error;
pub mod expcli;
pub mod femgrid;
pub mod oblique;
pub mod solver;

pub use actuation::ActuatorSet;
pub use basis::{BoundaryKind, SpectralBasis};
pub use error::{Error, Result};
pub use femgrid::{Grid, MassMatrix};
pub use oblique::ObliqueProjector;
pub use solver::{FeedbackConfig, GalerkinState, ModelKind, ModelParams, Trajectory};

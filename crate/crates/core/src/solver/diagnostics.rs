use crate::error::{Error, Result};

use super::galerkin::Discretization;
use super::ModelParams;

/// Exact L² norm of a Galerkin expansion.
pub fn l2_norm(z: &[f64], disc: &Discretization) -> f64 {
    z.iter()
        .zip(disc.norms())
        .map(|(c, n)| c * c * n)
        .sum::<f64>()
        .sqrt()
}

/// `‖z‖_V² = ν₂‖∂ₓ²z‖² + 2ν₂‖∂ₓz‖² + ν₂‖z‖²`, evaluated mode by mode.
pub fn v_norm(z: &[f64], disc: &Discretization, params: &ModelParams) -> f64 {
    let sum: f64 = z
        .iter()
        .zip(disc.eigenvalues())
        .zip(disc.norms())
        .map(|((c, mu), n)| (mu * mu + 2.0 * mu + 1.0) * c * c * n)
        .sum();
    (params.nu2 * sum).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Decay rate: the fitted slope of `ln d(t)` is `-mu`.
    pub mu: f64,
    /// Prefactor, `d(t) ≈ C e^{-μt}`.
    pub c: f64,
    pub samples: usize,
}

/// Samples at or below this distance are treated as converged and excluded.
pub const DECAY_FLOOR: f64 = 1e-10;

/// Least-squares fit of `ln d = ln C - μt` over the leading samples with
/// `d > 1e-10`.
pub fn fit_decay(times: &[f64], distances: &[f64]) -> Result<DecayFit> {
    let used = times
        .iter()
        .zip(distances)
        .take_while(|(_, &d)| d > DECAY_FLOOR && d.is_finite())
        .count();
    if used < 2 {
        return Err(Error::TooFewSamples(used));
    }
    let n = used as f64;
    let xs = &times[..used];
    let ys: Vec<f64> = distances[..used].iter().map(|d| d.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::TooFewSamples(used));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(DecayFit { mu: -slope, c: intercept.exp(), samples: used })
}

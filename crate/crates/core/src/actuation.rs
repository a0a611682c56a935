//! Indicator-function actuators.
//!
//! `M` actuators on `[0, L)`, actuator `j` being the indicator of the open
//! interval `ω_j = (c_j - rL/(2M), c_j + rL/(2M))` with center
//! `c_j = (2j - 1)L/(2M)`. Together they cover a fraction `r` of the domain.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorSet {
    count: usize,
    fraction: f64,
    length: f64,
    centers: Vec<f64>,
    half_width: f64,
}

impl ActuatorSet {
    pub fn build(count: usize, fraction: f64, length: f64) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidParameter("need at least one actuator (M >= 1)".into()));
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "actuator volume fraction r must lie in (0, 1), got {fraction}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let m = count as f64;
        let centers = (1..=count)
            .map(|j| (2 * j - 1) as f64 * length / (2.0 * m))
            .collect();
        Ok(Self {
            count,
            fraction,
            length,
            centers,
            half_width: fraction * length / (2.0 * m),
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Open support interval `(a, b)` of actuator `j` (1-based).
    pub fn support(&self, j: usize) -> Result<(f64, f64)> {
        self.check_index(j)?;
        let c = self.centers[j - 1];
        Ok((c - self.half_width, c + self.half_width))
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.count {
            return Err(Error::ActuatorIndex { index: j, count: self.count });
        }
        Ok(())
    }

    /// `1` strictly inside `ω_j`, `0` elsewhere (endpoints included).
    pub fn eval_actuator(&self, j: usize, x: f64) -> Result<f64> {
        self.check_index(j)?;
        let (a, b) = self.support(j)?;
        Ok(if x > a && x < b { 1.0 } else { 0.0 })
    }

    /// Actuator scaled to unit L² norm, `(M/(rL))^{1/2}` on its support.
    pub fn eval_normalized_actuator(&self, j: usize, x: f64) -> Result<f64> {
        Ok(self.eval_actuator(j, x)? / self.support_measure().sqrt())
    }

    /// Measure of one support, `rL/M`.
    pub fn support_measure(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Samples actuator `j` on the given nodes by exact interval membership.
    pub fn sample(&self, j: usize, nodes: &[f64]) -> Result<Vec<f64>> {
        self.check_index(j)?;
        let (a, b) = self.support(j)?;
        Ok(nodes
            .iter()
            .map(|&x| if x > a && x < b { 1.0 } else { 0.0 })
            .collect())
    }
}

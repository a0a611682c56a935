//! Crank–Nicolson / Adams–Bashforth stepping.
//!
//! Per mode, with linear symbol `g_n = ν₂μ_n² - ν₁μ_n`,
//!
//! ```text
//! (1 + dt/2·g_n) z_n^{k+1} = (1 - dt/2·g_n) z_n^k + dt/2·(f_n^{k+1} + f_n^k)
//!                          + dt·(3/2·Q_n^k - 1/2·Q_n^{k-1})
//! ```
//!
//! where `Q = -ν₀P𝒩(z) + C_feed·P(Σ u_j 1_{ω_j})`. The first step uses
//! `Q^{-1} = Q^0`.

use crate::error::{Error, Result};

use super::diagnostics::{l2_norm, v_norm};
use super::feedback::{FeedbackConfig, FeedbackLaw};
use super::galerkin::Discretization;
use super::manufactured::manufactured_forcing;
use super::{Forcing, GalerkinState, ModelParams};

/// Runs abort once any coefficient exceeds this magnitude.
pub const BLOW_UP_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub final_time: f64,
    pub dt: f64,
    /// Record a sample every this many steps (the final step is always recorded).
    pub sample_every: usize,
}

impl Horizon {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
        }
        let steps = (self.final_time / self.dt).round();
        if (steps * self.dt - self.final_time).abs() > 1e-9 * self.final_time {
            return Err(Error::InvalidParameter(format!(
                "final time {} is not a multiple of dt {}",
                self.final_time, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub target: Vec<f64>,
    pub tracked: Option<Vec<f64>>,
    /// Spatial mean of the tracked state (of the target when there is none).
    pub mean: f64,
    pub mean_target: f64,
    pub l2_distance: f64,
    pub v_distance: f64,
    pub controls: Vec<f64>,
}

impl Sample {
    pub fn max_abs_control(&self) -> f64 {
        self.controls.iter().fold(0.0, |m, u| m.max(u.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn l2_distances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.l2_distance).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.mean).collect()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

struct Track {
    z: Vec<f64>,
    previous: Option<Vec<f64>>,
}

/// Explicit terms evaluated at the current time level.
#[derive(Debug, Clone)]
pub struct StepTerms {
    q_target: Vec<f64>,
    q_tracked: Option<Vec<f64>>,
    /// Actuator amplitudes at the current time (empty without feedback).
    pub controls: Vec<f64>,
}

/// Advances a target state `ŷ` and optionally a tracked state `ỹ` in lockstep.
pub struct Integrator {
    params: ModelParams,
    disc: Discretization,
    feedback: Option<FeedbackLaw>,
    feedback_on: bool,
    dt: f64,
    step: usize,
    t: f64,
    target: Track,
    tracked: Option<Track>,
    forcing_now: Vec<f64>,
    /// `1 - dt/2·g_n` and `1/(1 + dt/2·g_n)`.
    explicit_factor: Vec<f64>,
    implicit_inverse: Vec<f64>,
}

impl Integrator {
    pub fn new(
        params: ModelParams,
        disc: Discretization,
        feedback: Option<&FeedbackConfig>,
        target: GalerkinState,
        tracked: Option<GalerkinState>,
        dt: f64,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        disc.check_state(&target.z)?;
        if let Some(s) = &tracked {
            disc.check_state(&s.z)?;
            if s.t != target.t {
                return Err(Error::InvalidParameter("target and tracked states must share t".into()));
            }
        }
        if params.forcing == Forcing::Manufactured && (disc.grid().length() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "the manufactured solution is defined on [0, 1) only".into(),
            ));
        }
        let law = feedback.map(|cfg| FeedbackLaw::new(cfg, &disc)).transpose()?;
        let feedback_on = feedback.is_some_and(|c| c.enabled) && tracked.is_some();
        let symbols: Vec<f64> = disc.eigenvalues().iter().map(|&mu| params.linear_symbol(mu)).collect();
        let explicit_factor = symbols.iter().map(|g| 1.0 - 0.5 * dt * g).collect();
        let implicit_inverse = symbols.iter().map(|g| 1.0 / (1.0 + 0.5 * dt * g)).collect();
        let t = target.t;
        let mut integrator = Self {
            params,
            disc,
            feedback: law,
            feedback_on,
            dt,
            step: 0,
            t,
            target: Track { z: target.z, previous: None },
            tracked: tracked.map(|s| Track { z: s.z, previous: None }),
            forcing_now: Vec::new(),
            explicit_factor,
            implicit_inverse,
        };
        integrator.forcing_now = integrator.forcing_at(t);
        Ok(integrator)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn target(&self) -> GalerkinState {
        GalerkinState::new(self.t, self.target.z.clone())
    }

    pub fn tracked(&self) -> Option<GalerkinState> {
        self.tracked.as_ref().map(|s| GalerkinState::new(self.t, s.z.clone()))
    }

    fn forcing_at(&self, t: f64) -> Vec<f64> {
        match self.params.forcing {
            Forcing::Zero => vec![0.0; self.disc.modes()],
            Forcing::Manufactured => {
                let params = self.params;
                self.disc.project_fn(|x| manufactured_forcing(&params, t, x))
            }
        }
    }

    /// Nonlinear and feedback terms at the current time level.
    pub fn evaluate(&self) -> Result<StepTerms> {
        let nu0 = self.params.nu0;
        let transform = self.disc.transform();
        let n_hat = self.disc.pointwise_nonlinearity(&self.params, &self.target.z);
        let q_target = negate_scaled(transform.analyze(&n_hat), nu0);
        let mut controls = Vec::new();
        let q_tracked = match &self.tracked {
            None => None,
            Some(tr) => {
                let n_tilde = self.disc.pointwise_nonlinearity(&self.params, &tr.z);
                let mut q = negate_scaled(transform.analyze(&n_tilde), nu0);
                if let Some(law) = &self.feedback {
                    let (u, coeffs) = law.evaluate(
                        &self.params,
                        &self.disc,
                        &tr.z,
                        &self.target.z,
                        &n_tilde,
                        &n_hat,
                    )?;
                    if self.feedback_on {
                        for (qi, ci) in q.iter_mut().zip(&coeffs) {
                            *qi += ci;
                        }
                        controls = u;
                    }
                }
                Some(q)
            }
        };
        Ok(StepTerms { q_target, q_tracked, controls })
    }

    /// Advances one step using terms from [`Integrator::evaluate`] at the current level.
    pub fn advance(&mut self, terms: StepTerms) -> Result<()> {
        let t_next = self.t + self.dt;
        let forcing_next = self.forcing_at(t_next);
        let StepTerms { q_target, q_tracked, .. } = terms;
        self.update_track(true, q_target, &forcing_next);
        if let Some(q) = q_tracked {
            self.update_track(false, q, &forcing_next);
        }
        self.step += 1;
        self.t = t_next;
        self.forcing_now = forcing_next;
        let bad = |z: &[f64]| z.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_LIMIT);
        if bad(&self.target.z) || self.tracked.as_ref().is_some_and(|s| bad(&s.z)) {
            return Err(Error::BlowUp { step: self.step, time: self.t });
        }
        Ok(())
    }

    fn update_track(&mut self, is_target: bool, q: Vec<f64>, forcing_next: &[f64]) {
        let dt = self.dt;
        let track = if is_target {
            &mut self.target
        } else {
            self.tracked.as_mut().expect("tracked state present")
        };
        let prev = track.previous.as_deref().unwrap_or(&q);
        for n in 0..track.z.len() {
            let explicit = 1.5 * q[n] - 0.5 * prev[n];
            let rhs = self.explicit_factor[n] * track.z[n]
                + 0.5 * dt * (forcing_next[n] + self.forcing_now[n])
                + dt * explicit;
            track.z[n] = rhs * self.implicit_inverse[n];
        }
        track.previous = Some(q);
    }

    pub fn step(&mut self) -> Result<StepTerms> {
        let terms = self.evaluate()?;
        self.advance(terms.clone())?;
        Ok(terms)
    }

    fn sample(&self, controls: Vec<f64>) -> Sample {
        let (l2_distance, v_distance, mean) = match &self.tracked {
            Some(tr) => {
                let y: Vec<f64> = tr.z.iter().zip(&self.target.z).map(|(a, b)| a - b).collect();
                (l2_norm(&y, &self.disc), v_norm(&y, &self.disc, &self.params), tr.z[0])
            }
            None => (0.0, 0.0, self.target.z[0]),
        };
        Sample {
            t: self.t,
            target: self.target.z.clone(),
            tracked: self.tracked.as_ref().map(|s| s.z.clone()),
            mean,
            mean_target: self.target.z[0],
            l2_distance,
            v_distance,
            controls,
        }
    }
}

fn negate_scaled(mut v: Vec<f64>, scale: f64) -> Vec<f64> {
    for x in v.iter_mut() {
        *x *= -scale;
    }
    v
}

/// Integrates to `horizon.final_time`, recording samples.
///
/// With `feedback = None` (or a disabled config) both states evolve freely.
pub fn run(
    params: ModelParams,
    disc: Discretization,
    feedback: Option<&FeedbackConfig>,
    target: GalerkinState,
    tracked: Option<GalerkinState>,
    horizon: &Horizon,
) -> Result<Trajectory> {
    let steps = horizon.steps()?;
    let mut integrator = Integrator::new(params, disc, feedback, target, tracked, horizon.dt)?;
    let mut samples = Vec::with_capacity(steps / horizon.sample_every + 2);
    for k in 0..steps {
        let terms = integrator.evaluate()?;
        if k % horizon.sample_every == 0 {
            samples.push(integrator.sample(terms.controls.clone()));
        }
        integrator.advance(terms)?;
    }
    let terms = integrator.evaluate()?;
    samples.push(integrator.sample(terms.controls));
    Ok(Trajectory { samples, steps })
}

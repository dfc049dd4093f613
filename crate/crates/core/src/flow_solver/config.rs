use crate::{Error, Result};

/// Step sizes `δ_i` of the discrete methods.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `c / sqrt(i + 1)`.
    Diminishing(f64),
}

impl StepRule {
    pub fn step(&self, iter: usize) -> f64 {
        match *self {
            StepRule::Constant(c) => c,
            StepRule::Diminishing(c) => c / ((iter + 1) as f64).sqrt(),
        }
    }

    /// The same rule with its constant multiplied by `f`.
    pub fn scaled(&self, f: f64) -> Self {
        match *self {
            StepRule::Constant(c) => StepRule::Constant(c * f),
            StepRule::Diminishing(c) => StepRule::Diminishing(c * f),
        }
    }

    pub fn constant(&self) -> f64 {
        match *self {
            StepRule::Constant(c) | StepRule::Diminishing(c) => c,
        }
    }
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Diminishing(1.0)
    }
}

/// Moreau smoothing of a nonsmooth objective: `λ_i = λ0` or `λ0 / sqrt(i+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothing {
    pub lambda0: f64,
    pub schedule: bool,
}

impl Smoothing {
    pub fn fixed(lambda0: f64) -> Self {
        Self { lambda0, schedule: false }
    }

    pub fn scheduled(lambda0: f64) -> Self {
        Self { lambda0, schedule: true }
    }

    pub fn lambda(&self, iter: usize) -> f64 {
        if self.schedule {
            self.lambda0 / ((iter + 1) as f64).sqrt()
        } else {
            self.lambda0
        }
    }
}

/// Solver configuration shared by all methods.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub smoothing: Option<Smoothing>,
    /// Initial step `h` of the geodesic Euler integrator.
    pub ode_step: f64,
    /// Stop the integrator once this much time has elapsed.
    pub horizon: Option<f64>,
    /// Relative best-value improvement below which a run counts as stalled.
    pub tol_stall: f64,
    pub stall_window: usize,
    /// Norm of the traceless part of `Z` below which a run has converged.
    pub stationarity_tol: f64,
    pub seed: u64,
    pub record_every: usize,
    /// Keep differentials and velocities in the samples (needed for the
    /// energy identity).
    pub record_vectors: bool,
    /// Period of the `|det g_i| = 1` renormalization in the group method.
    pub renormalize_every: usize,
    /// Group-form runs stop once a factor of `g` is this ill-conditioned;
    /// beyond it rounding noise in `g·v` is amplified past the accuracy of
    /// the objective.
    pub max_condition: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            step_rule: StepRule::default(),
            smoothing: None,
            ode_step: 1e-2,
            horizon: None,
            tol_stall: 1e-12,
            stall_window: 500,
            stationarity_tol: 1e-12,
            seed: 0,
            record_every: 1,
            record_vectors: false,
            renormalize_every: 100,
            max_condition: 1e8,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let c = self.step_rule.constant();
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Parameter(format!("step constant must be nonnegative, got {c}")));
        }
        positive("ode_step", self.ode_step)?;
        if let Some(s) = self.smoothing {
            positive("smoothing lambda0", s.lambda0)?;
        }
        if let Some(h) = self.horizon {
            positive("horizon", h)?;
        }
        if !(self.tol_stall.is_finite() && self.tol_stall >= 0.0) {
            return Err(Error::Parameter(format!("tol_stall must be nonnegative, got {}", self.tol_stall)));
        }
        if !(self.stationarity_tol.is_finite() && self.stationarity_tol >= 0.0) {
            return Err(Error::Parameter("stationarity_tol must be nonnegative".into()));
        }
        if !(self.max_condition > 1.0) {
            return Err(Error::Parameter(format!("max_condition must exceed 1, got {}", self.max_condition)));
        }
        if self.record_every == 0 || self.stall_window == 0 || self.renormalize_every == 0 {
            return Err(Error::Parameter("record_every, stall_window and renormalize_every must be positive".into()));
        }
        Ok(())
    }
}

//! Slip-suppressing reflex: an adaptive estimate of the object's
//! mass-to-friction ratio drives the desired grip force.
//!
//! The slip model `v̇ − g = a·f_e` has a single unknown `a = −μ/m′`. The
//! gradient law `â̇ = α·ε·f_e` with innovation `ε = (v̇ − g) − â·f_e`
//! estimates it, and the grip force `f_d = m̂·(g + b·v)` with `m̂ = −1/â`
//! makes the slip velocity decay as `v(0)·e^(−b·t)` once `â = a`.

use crate::contact::{slip_rate, ObjectParams};
use crate::error::{require, ParamError};

/// Admissible range of `m̂`, kg. Keeps `â` bounded away from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for MassBounds {
    fn default() -> Self {
        MassBounds { min: 1e-3, max: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorState {
    pub a_hat: f64,
    pub alpha: f64,
    pub a0: f64,
    pub bounds: MassBounds,
}

impl EstimatorState {
    pub fn new(a0: f64, alpha: f64, bounds: MassBounds) -> Result<Self, ParamError> {
        require(alpha >= 0.0 && alpha.is_finite(), "adaptation gain", "must be non-negative", alpha)?;
        require(bounds.min > 0.0, "minimum mass estimate", "must be positive", bounds.min)?;
        require(bounds.max > bounds.min, "maximum mass estimate", "must exceed the minimum", bounds.max)?;
        let mut est = EstimatorState { a_hat: a0, alpha, a0, bounds };
        est.a_hat = est.clamp(a0);
        require(est.a_hat == a0, "initial estimate", "must lie within the mass bounds", a0)?;
        Ok(est)
    }

    /// Start from an initial mass guess `m̂₀` (kg), i.e. `a₀ = −1/m̂₀`.
    pub fn from_mass(m_hat0: f64, alpha: f64, bounds: MassBounds) -> Result<Self, ParamError> {
        require(m_hat0 > 0.0, "initial mass estimate", "must be positive", m_hat0)?;
        Self::new(-1.0 / m_hat0, alpha, bounds)
    }

    pub fn m_hat(&self) -> f64 {
        -1.0 / self.a_hat
    }

    fn clamp(&self, a: f64) -> f64 {
        a.clamp(-1.0 / self.bounds.min, -1.0 / self.bounds.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflexParams {
    /// Slip decay rate `b`, 1/s.
    pub b: f64,
    /// Cutoff of the low-pass filter on the differentiated slip velocity, Hz.
    /// `None` uses the raw backward difference.
    pub accel_cutoff_hz: Option<f64>,
    /// The estimate only adapts while the measured slip velocity exceeds
    /// this, m/s. A stuck object carries static friction, which the slip
    /// model does not describe.
    pub slip_gate: f64,
}

impl Default for ReflexParams {
    fn default() -> Self {
        ReflexParams { b: 20.0, accel_cutoff_hz: Some(100.0), slip_gate: 0.0 }
    }
}

impl ReflexParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.b > 0.0 && self.b.is_finite(), "reflex gain b", "must be positive", self.b)?;
        if let Some(fc) = self.accel_cutoff_hz {
            require(fc > 0.0, "acceleration filter cutoff", "must be positive", fc)?;
        }
        require(self.slip_gate >= 0.0, "slip gate", "must be non-negative", self.slip_gate)
    }
}

/// `ε = (v̇ − g) − â·f_e`.
pub fn innovation(v_dot: f64, g: f64, f_e: f64, est: &EstimatorState) -> f64 {
    (v_dot - g) - est.a_hat * f_e
}

/// One explicit-Euler step of `â̇ = α·ε·f_e`, clamped to the mass bounds.
pub fn update_estimate(est: &EstimatorState, eps: f64, f_e: f64, dt: f64) -> EstimatorState {
    debug_assert!(dt > 0.0);
    let a_hat = est.clamp(est.a_hat + est.alpha * eps * f_e * dt);
    EstimatorState { a_hat, ..*est }
}

/// `f_d = max(0, m̂·(g + b·v))`.
pub fn desired_force(est: &EstimatorState, v: f64, g: f64, params: &ReflexParams) -> f64 {
    (est.m_hat() * (g + params.b * v)).max(0.0)
}

/// `τ_d = H·f_d`.
pub fn desired_torque(f_d: f64, coupling: f64) -> f64 {
    coupling * f_d
}

/// Slip acceleration from successive velocity samples: backward difference
/// followed by a single-pole low-pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelEstimator {
    cutoff_hz: Option<f64>,
    prev_v: Option<f64>,
    filtered: f64,
}

impl AccelEstimator {
    pub fn new(cutoff_hz: Option<f64>) -> Self {
        AccelEstimator { cutoff_hz, prev_v: None, filtered: 0.0 }
    }

    pub fn update(&mut self, v: f64, dt: f64) -> f64 {
        let raw = match self.prev_v {
            Some(prev) => (v - prev) / dt,
            None => 0.0,
        };
        self.prev_v = Some(v);
        self.filtered = match self.cutoff_hz {
            None => raw,
            Some(fc) => {
                let tau = 1.0 / (2.0 * std::f64::consts::PI * fc);
                self.filtered + dt / (dt + tau) * (raw - self.filtered)
            }
        };
        self.filtered
    }
}

/// Slip velocity under the reflex law when the contact force equals the
/// desired force at every instant (ideal force tracking). The estimate is
/// frozen at `est`. Integrated with classical RK4; returns `(t, v)` samples
/// including `t = 0`.
pub fn ideal_tracking_slip(
    object: &ObjectParams,
    reflex: &ReflexParams,
    est: &EstimatorState,
    v0: f64,
    dt: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let rate = |v: f64| slip_rate(v, desired_force(est, v, object.gravity, reflex), object);
    let mut v = v0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, v));
    for k in 1..=steps {
        let k1 = rate(v);
        let k2 = rate(v + 0.5 * dt * k1);
        let k3 = rate(v + 0.5 * dt * k2);
        let k4 = rate(v + dt * k3);
        v = (v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
        out.push((k as f64 * dt, v));
    }
    out
}

//! Normal contact between fingertip and object, and the tangential slip of
//! the held object under gravity and Coulomb friction.

use nalgebra::Vector2;

use crate::error::{require, ParamError};
use crate::finger::{coupling_unchecked, reduced_fingertip, FingerParams};

/// One-sided linear spring along a fixed contact normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactModel {
    /// Environment stiffness in N/m.
    pub stiffness: f64,
    /// Position of the object surface measured along `normal`, in m.
    pub surface_position: f64,
    /// Unit approach direction in the finger base frame.
    pub normal: Vector2<f64>,
}

impl ContactModel {
    pub fn new(stiffness: f64, surface_position: f64, normal: Vector2<f64>) -> Result<Self, ParamError> {
        let m = ContactModel { stiffness, surface_position, normal };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        require(
            self.stiffness > 0.0 && self.stiffness.is_finite(),
            "contact stiffness",
            "must be positive",
            self.stiffness,
        )?;
        require(self.surface_position.is_finite(), "surface position", "must be finite", self.surface_position)?;
        let n = self.normal.norm();
        require((n - 1.0).abs() <= 1e-9, "contact normal", "must have unit length", n)
    }

    pub fn penetration(&self, fingertip: &Vector2<f64>) -> f64 {
        (fingertip.dot(&self.normal) - self.surface_position).max(0.0)
    }
}

impl Default for ContactModel {
    fn default() -> Self {
        ContactModel { stiffness: 10_000.0, surface_position: 0.05, normal: Vector2::new(0.0, 1.0) }
    }
}

/// Magnitude of the normal contact force. Zero when the fingertip is short of
/// the surface; the spring never pulls.
pub fn contact_force(fingertip: &Vector2<f64>, model: &ContactModel) -> f64 {
    model.stiffness * model.penetration(fingertip)
}

/// Reduced joint angle at which the fingertip just touches the surface.
///
/// Scans outward from `θ₁ = 0` over the range where the fingertip still
/// advances along the normal, then bisects the bracketing interval.
pub fn object_angle(model: &ContactModel, finger: &FingerParams) -> Result<f64, ParamError> {
    let gap = |th: f64| reduced_fingertip(th, finger).dot(&model.normal) - model.surface_position;
    const SCAN: f64 = 1e-3;
    let mut lo = 0.0;
    if gap(lo) >= 0.0 {
        return Err(ParamError::new("surface position", "must lie beyond the open finger", model.surface_position));
    }
    let mut hi = lo;
    loop {
        hi += SCAN;
        if hi > std::f64::consts::PI || coupling_unchecked(hi, &model.normal, finger) <= 0.0 {
            return Err(ParamError::new("surface position", "is out of the finger's reach", model.surface_position));
        }
        if gap(hi) >= 0.0 {
            break;
        }
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectParams {
    /// Effective mass `m′/μ` in kg.
    pub m_over_mu: f64,
    /// Gravitational acceleration in m/s².
    pub gravity: f64,
}

impl ObjectParams {
    pub fn new(m_over_mu: f64, gravity: f64) -> Result<Self, ParamError> {
        require(m_over_mu > 0.0 && m_over_mu.is_finite(), "m_over_mu", "must be positive", m_over_mu)?;
        require(gravity >= 0.0 && gravity.is_finite(), "gravity", "must be non-negative", gravity)?;
        Ok(ObjectParams { m_over_mu, gravity })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectState {
    /// Slip velocity along gravity, m/s. Positive is downward.
    pub v: f64,
    /// Accumulated slip, m.
    pub s: f64,
}

/// `v̇ = g − f_e/m` while slipping.
pub fn slip_acceleration(f_e: f64, params: &ObjectParams) -> f64 {
    params.gravity - f_e / params.m_over_mu
}

/// Slip acceleration with static friction: friction cannot push the object
/// upward, so a stopped object with a holding force stays put.
pub fn slip_rate(v: f64, f_e: f64, params: &ObjectParams) -> f64 {
    let a = slip_acceleration(f_e, params);
    if v <= 0.0 && a < 0.0 {
        0.0
    } else {
        a
    }
}

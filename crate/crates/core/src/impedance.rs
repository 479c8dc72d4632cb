//! Two-phase force-tracking impedance control on the reduced coordinate.
//!
//! Free space: position control with stiffness `K` toward `θ₁d` and zero
//! desired torque. Contact: `K` is dropped and the controller tracks the
//! desired contact torque `τ_d`, so that at rest `τ_c = τ_d`. Combined with
//! the computed-torque law
//!
//! ```text
//! τ' = D'·U + C'·θ̇₁ + τ_c
//! ```
//!
//! the closed loop obeys `M·ë + B·ė + K_eff·e = w·(τ_c − τ_d)` with
//! `e = θ₁ref − θ₁`.

use crate::error::{require, ControlError, ParamError};
use crate::finger::{reduce_dynamics, FingerParams, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlPhase {
    #[default]
    FreeSpace,
    Contact,
}

impl ControlPhase {
    /// CSV encoding: 0 for free space, 1 for contact.
    pub fn code(self) -> u8 {
        match self {
            ControlPhase::FreeSpace => 0,
            ControlPhase::Contact => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ControlPhase::FreeSpace),
            1 => Some(ControlPhase::Contact),
            _ => None,
        }
    }
}

/// Hysteresis band on the measured contact torque, N·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseThresholds {
    pub enter: f64,
    pub exit: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        PhaseThresholds { enter: 1e-4, exit: 5e-5 }
    }
}

impl PhaseThresholds {
    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.exit >= 0.0, "phase exit threshold", "must be non-negative", self.exit)?;
        require(self.enter > self.exit, "phase enter threshold", "must exceed the exit threshold", self.enter)
    }
}

pub fn select_phase(tau_c: f64, current: ControlPhase, thresholds: &PhaseThresholds) -> ControlPhase {
    match current {
        ControlPhase::FreeSpace if tau_c > thresholds.enter => ControlPhase::Contact,
        ControlPhase::Contact if tau_c < thresholds.exit => ControlPhase::FreeSpace,
        p => p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ImpedanceMode {
    /// `M·ë + B·ė + K·e = w·(τ_c − τ_d)`, realized by computed torque.
    #[default]
    SecondOrder,
    /// `B·ė + K·e = w·(τ_c − τ_d)` solved for a commanded joint rate, which a
    /// proportional velocity loop with the given gain (1/s) then tracks.
    FirstOrder { velocity_gain: f64 },
}

/// Coordinate in which the torque error enters the target impedance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImpedanceFrame {
    /// Torque error used as-is: `w = 1`.
    Joint,
    /// Torque error expressed as force per unit normal displacement:
    /// `w = 1/H²`. `M`, `B`, `K` then act like a Cartesian impedance along the
    /// contact normal.
    #[default]
    ContactNormal,
}

impl ImpedanceFrame {
    /// Weight `w` applied to `τ_c − τ_d` given the coupling scalar `H`.
    pub fn torque_weight(self, coupling: f64) -> f64 {
        match self {
            ImpedanceFrame::Joint => 1.0,
            ImpedanceFrame::ContactNormal => 1.0 / (coupling * coupling),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceParams {
    pub m: f64,
    pub b: f64,
    pub k: f64,
    /// Include the reference acceleration `θ̈₁d` in `U`.
    pub feedforward_accel: bool,
    pub mode: ImpedanceMode,
    pub frame: ImpedanceFrame,
}

impl Default for ImpedanceParams {
    /// `M = 1`, `B = 190`, `K = 9025`: critically damped since `B² = 4MK`.
    fn default() -> Self {
        ImpedanceParams {
            m: 1.0,
            b: 190.0,
            k: 9025.0,
            feedforward_accel: false,
            mode: ImpedanceMode::SecondOrder,
            frame: ImpedanceFrame::ContactNormal,
        }
    }
}

impl ImpedanceParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.m >= 0.0 && self.m.is_finite(), "impedance M", "must be non-negative", self.m)?;
        require(self.b > 0.0 && self.b.is_finite(), "impedance B", "must be positive", self.b)?;
        require(self.k >= 0.0 && self.k.is_finite(), "impedance K", "must be non-negative", self.k)?;
        if let ImpedanceMode::FirstOrder { velocity_gain } = self.mode {
            require(velocity_gain > 0.0, "velocity gain", "must be positive", velocity_gain)?;
        }
        Ok(())
    }

    /// Stiffness actually applied in `phase`.
    pub fn effective_stiffness(&self, phase: ControlPhase) -> f64 {
        match phase {
            ControlPhase::FreeSpace => self.k,
            ControlPhase::Contact => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlTargets {
    pub theta1_ref: f64,
    pub theta1_ref_dot: f64,
    pub theta1_ref_ddot: f64,
    /// Desired contact torque, N·m. Ignored in free space.
    pub tau_d: f64,
}

/// Commanded reduced acceleration `U`.
///
/// `coupling` is the current `H`; it only matters for
/// [`ImpedanceFrame::ContactNormal`].
pub fn control_input(
    state: &ReducedState,
    targets: &ControlTargets,
    tau_c: f64,
    params: &ImpedanceParams,
    phase: ControlPhase,
    coupling: f64,
) -> Result<f64, ControlError> {
    let e = targets.theta1_ref - state.theta1;
    let e_dot = targets.theta1_ref_dot - state.theta1_dot;
    let tau_d = match phase {
        ControlPhase::FreeSpace => 0.0,
        ControlPhase::Contact => targets.tau_d,
    };
    let torque_term = weighted_torque_error(tau_c - tau_d, params.frame, coupling);
    let k = params.effective_stiffness(phase);
    let ff = if params.feedforward_accel { targets.theta1_ref_ddot } else { 0.0 };
    match params.mode {
        ImpedanceMode::SecondOrder => {
            if params.m == 0.0 {
                return Err(ControlError::ZeroInertia);
            }
            Ok(ff + (params.b * e_dot + k * e - torque_term) / params.m)
        }
        ImpedanceMode::FirstOrder { velocity_gain } => {
            // B·ė + K·e = w·(τ_c − τ_d)  ⇒  θ̇ = θ̇ref − ė
            let e_dot_cmd = (torque_term - k * e) / params.b;
            let rate_cmd = targets.theta1_ref_dot - e_dot_cmd;
            Ok(ff + velocity_gain * (rate_cmd - state.theta1_dot))
        }
    }
}

/// Computed-torque law `τ' = D'·U + C'·θ̇₁ + τ_c`.
pub fn control_torque(state: &ReducedState, u: f64, tau_c: f64, params: &FingerParams) -> f64 {
    let rd = reduce_dynamics(state.theta1, state.theta1_dot, params);
    rd.d_prime * u + rd.c_prime * state.theta1_dot + tau_c
}

/// Position error `e = θ₁d − θ₁` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingError {
    pub e: f64,
    pub e_dot: f64,
    pub e_ddot: f64,
}

/// Left-hand side minus right-hand side of the target error dynamics,
/// `M·ë + B·ė + K_eff·e − w·(τ_c − τ_d)`.
pub fn error_dynamics_residual(
    err: &TrackingError,
    tau_c: f64,
    tau_d: f64,
    params: &ImpedanceParams,
    phase: ControlPhase,
    coupling: f64,
) -> f64 {
    let tau_d = match phase {
        ControlPhase::FreeSpace => 0.0,
        ControlPhase::Contact => tau_d,
    };
    params.m * err.e_ddot + params.b * err.e_dot + params.effective_stiffness(phase) * err.e
        - weighted_torque_error(tau_c - tau_d, params.frame, coupling)
}

/// `w·(τ_c − τ_d)`; exactly zero when the torques agree, even where `w` is
/// unbounded (`H = 0`).
fn weighted_torque_error(diff: f64, frame: ImpedanceFrame, coupling: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        frame.torque_weight(coupling) * diff
    }
}

//! Built-in scenarios: a free-space step, a scripted force profile and the
//! slip reflex under sudden changes of the object's mass-to-friction ratio.

use crate::contact::ContactModel;
use crate::finger::FingerParams;
use crate::impedance::{ControlPhase, ImpedanceParams, PhaseThresholds};
use crate::sim::{ForceCommand, InitialConditions, ObjectSetup, ReferenceSetup, ReflexSetup, Scenario, Schedule};

pub const GRAVITY: f64 = 9.81;

/// Starting gap and approach depth, both in rad of `θ₁` relative to the
/// contact angle.
const APPROACH_GAP: f64 = 0.005;
const APPROACH_DEPTH: f64 = 0.005;

pub const BUILTIN_NAMES: [&str; 3] = ["fig3_step", "fig4_force", "fig6_slip"];

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "fig3_step" => Some(fig3_step()),
        "fig4_force" => Some(fig4_force()),
        "fig6_slip" => Some(fig6_slip()),
        _ => None,
    }
}

/// One-line description for `list`.
pub fn describe(name: &str) -> &'static str {
    match name {
        "fig3_step" => "free-space step of the proximal joint, 0 -> 0.5 rad at 0.1 s (B=190, K=9025)",
        "fig4_force" => "force profile 0 -> 2 N at 1 s -> 5 N at 6 s against a 10 kN/m surface",
        "fig6_slip" => "slip reflex, m/mu 50 g -> 70 g at 5 s -> 80 g at 10 s (alpha=320, b=20)",
        _ => "",
    }
}

/// Free-space position step; no object in reach.
pub fn fig3_step() -> Scenario {
    Scenario {
        name: "fig3_step".into(),
        duration: 1.0,
        finger: FingerParams::human_index(),
        contact: None,
        object: None,
        impedance: ImpedanceParams::default(),
        thresholds: PhaseThresholds::default(),
        initial_phase: ControlPhase::FreeSpace,
        reference: ReferenceSetup {
            schedule: Schedule { initial: 0.0, steps: vec![(0.1, 0.5)] },
            relative_to_object: false,
        },
        force: ForceCommand::Profile(Schedule::constant(0.0)),
        initial: InitialConditions::default(),
    }
}

/// The finger waits just short of the object, closes on it at 1 s and then
/// tracks the scripted force.
pub fn fig4_force() -> Scenario {
    Scenario {
        name: "fig4_force".into(),
        duration: 10.0,
        finger: FingerParams::human_index(),
        contact: Some(ContactModel::default()),
        object: None,
        impedance: ImpedanceParams::default(),
        thresholds: PhaseThresholds::default(),
        initial_phase: ControlPhase::FreeSpace,
        reference: ReferenceSetup {
            schedule: Schedule { initial: -APPROACH_GAP, steps: vec![(1.0, APPROACH_DEPTH)] },
            relative_to_object: true,
        },
        force: ForceCommand::Profile(Schedule { initial: 0.0, steps: vec![(1.0, 2.0), (6.0, 5.0)] }),
        initial: InitialConditions { theta1: -APPROACH_GAP, relative_to_object: true, ..Default::default() },
    }
}

/// The finger closes on the object at once; the reflex then holds it through
/// two sudden increases of `m′/μ`.
pub fn fig6_slip() -> Scenario {
    Scenario {
        name: "fig6_slip".into(),
        duration: 15.0,
        finger: FingerParams::human_index(),
        contact: Some(ContactModel::default()),
        object: Some(ObjectSetup {
            m_over_mu: Schedule { initial: 0.050, steps: vec![(5.0, 0.070), (10.0, 0.080)] },
            gravity: GRAVITY,
        }),
        impedance: ImpedanceParams::default(),
        thresholds: PhaseThresholds::default(),
        initial_phase: ControlPhase::FreeSpace,
        reference: ReferenceSetup { schedule: Schedule::constant(APPROACH_DEPTH), relative_to_object: true },
        force: ForceCommand::Reflex(ReflexSetup::default()),
        initial: InitialConditions { theta1: -APPROACH_GAP, relative_to_object: true, ..Default::default() },
    }
}

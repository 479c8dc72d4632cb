//! Fixed-step closed-loop simulation of finger, object, impedance controller
//! and slip reflex.
//!
//! Each step:
//! 1. schedule events due at the step boundary take effect;
//! 2. sensors are read (`f_e`, `v`, `τ_c = H·f_e`) and the phase is updated;
//! 3. the reflex updates `â` and the desired force `f_d`, giving `τ_d = H·f_d`;
//! 4. the row is appended to the trace;
//! 5. finger and object are integrated together over `dt`, with the
//!    impedance law evaluated at every integrator stage and `τ_d`, phase and
//!    object mass held;
//! 6. the slip clamp is applied.

use nalgebra::{Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::contact::{contact_force, object_angle, slip_rate, ContactModel, ObjectParams, ObjectState};
use crate::error::{require, ParamError, SimError};
use crate::finger::{coupling_unchecked, reduce_dynamics, reduced_fingertip, FingerParams, ReducedState};
use crate::impedance::{
    control_input, control_torque, select_phase, ControlPhase, ControlTargets, ImpedanceParams, PhaseThresholds,
};
use crate::reflex::{
    desired_force, desired_torque, innovation, update_estimate, AccelEstimator, EstimatorState, MassBounds,
    ReflexParams,
};
use crate::trace::{Trace, TraceRow};

/// Piecewise-constant signal: `initial` until the first step time, then each
/// step's value from its time onward.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub initial: f64,
    pub steps: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule { initial: value, steps: Vec::new() }
    }

    pub fn new(initial: f64, steps: Vec<(f64, f64)>) -> Result<Self, ParamError> {
        let s = Schedule { initial, steps };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.initial.is_finite(), "schedule value", "must be finite", self.initial)?;
        let mut last = f64::NEG_INFINITY;
        for &(t, v) in &self.steps {
            require(t >= 0.0 && t.is_finite(), "schedule time", "must be non-negative", t)?;
            require(t > last, "schedule time", "must be strictly increasing", t)?;
            require(v.is_finite(), "schedule value", "must be finite", v)?;
            last = t;
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.steps.iter().take_while(|(ts, _)| *ts <= t).last().map_or(self.initial, |&(_, v)| v)
    }

    /// Value at step `k` with event times snapped to the nearest boundary.
    pub fn value_at_step(&self, k: u64, dt: f64) -> f64 {
        self.steps.iter().take_while(|(ts, _)| snap(*ts, dt) <= k).last().map_or(self.initial, |&(_, v)| v)
    }

    /// Checks every value against `pred`.
    pub fn all(&self, pred: impl Fn(f64) -> bool) -> bool {
        pred(self.initial) && self.steps.iter().all(|&(_, v)| pred(v))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Schedule {
        Schedule { initial: f(self.initial), steps: self.steps.iter().map(|&(t, v)| (t, f(v))).collect() }
    }
}

fn snap(t: f64, dt: f64) -> u64 {
    (t / dt).round() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    SemiImplicitEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub integrator: Integrator,
    /// Seed for the optional measurement noise.
    pub seed: u64,
    /// Standard deviation of additive noise on the measured contact torque,
    /// N·m. Zero disables the noise source entirely.
    pub tau_c_noise: f64,
    /// The reflex (estimator and desired force) runs every this many steps.
    pub reflex_divider: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-4, integrator: Integrator::Rk4, seed: 0, tau_c_noise: 0.0, reflex_divider: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.dt > 0.0 && self.dt.is_finite(), "time step", "must be positive", self.dt)?;
        require(self.tau_c_noise >= 0.0, "torque noise", "must be non-negative", self.tau_c_noise)?;
        require(self.reflex_divider >= 1, "reflex divider", "must be at least 1", self.reflex_divider as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSetup {
    /// `m′/μ` over time, kg.
    pub m_over_mu: Schedule,
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflexSetup {
    pub params: ReflexParams,
    pub alpha: f64,
    /// Initial mass estimate, kg.
    pub m_hat0: f64,
    pub bounds: MassBounds,
}

impl Default for ReflexSetup {
    fn default() -> Self {
        ReflexSetup { params: ReflexParams::default(), alpha: 320.0, m_hat0: 0.03, bounds: MassBounds::default() }
    }
}

/// Source of the desired contact force.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceCommand {
    /// Scripted force profile, N.
    Profile(Schedule),
    /// Adaptive slip reflex.
    Reflex(ReflexSetup),
}

/// Position reference `θ₁d` for the free-space phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSetup {
    /// Reference in rad.
    pub schedule: Schedule,
    /// Values are offsets from the angle at which the fingertip touches the
    /// object.
    pub relative_to_object: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialConditions {
    pub theta1: f64,
    pub theta1_dot: f64,
    pub v: f64,
    /// `theta1` is an offset from the object contact angle.
    pub relative_to_object: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub finger: FingerParams,
    pub contact: Option<ContactModel>,
    pub object: Option<ObjectSetup>,
    pub impedance: ImpedanceParams,
    pub thresholds: PhaseThresholds,
    pub initial_phase: ControlPhase,
    pub reference: ReferenceSetup,
    pub force: ForceCommand,
    pub initial: InitialConditions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Free-space reference steps to `target` (absolute, rad) by `step`.
    Reference { target: f64, step: f64 },
    /// Scripted desired force changes to `target`, N.
    Force { target: f64 },
    /// Object `m′/μ` changes to `m_over_mu`, kg.
    Mass { m_over_mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioEvent {
    pub time: f64,
    pub kind: EventKind,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        require(self.duration > 0.0 && self.duration.is_finite(), "duration", "must be positive", self.duration)?;
        self.finger.validate()?;
        if let Some(c) = &self.contact {
            c.validate()?;
        }
        if let Some(o) = &self.object {
            o.m_over_mu.validate()?;
            require(o.m_over_mu.all(|m| m > 0.0), "m_over_mu", "must be positive", o.m_over_mu.initial)?;
            require(o.gravity >= 0.0 && o.gravity.is_finite(), "gravity", "must be non-negative", o.gravity)?;
        }
        self.impedance.validate()?;
        self.thresholds.validate()?;
        self.reference.schedule.validate()?;
        match &self.force {
            ForceCommand::Profile(s) => {
                s.validate()?;
                require(s.all(|f| f >= 0.0), "desired force", "must be non-negative", s.initial)?;
            }
            ForceCommand::Reflex(r) => {
                r.params.validate()?;
                EstimatorState::from_mass(r.m_hat0, r.alpha, r.bounds)?;
                if self.object.is_none() {
                    return Err(SimError::Scenario("the slip reflex needs an object".into()));
                }
            }
        }
        if self.contact.is_none() && (self.reference.relative_to_object || self.initial.relative_to_object) {
            return Err(SimError::Scenario("object-relative angles need a contact surface".into()));
        }
        self.object_angle()?;
        Ok(())
    }

    /// Angle at which the fingertip touches the object, if there is one.
    pub fn object_angle(&self) -> Result<Option<f64>, ParamError> {
        self.contact.as_ref().map(|c| object_angle(c, &self.finger)).transpose()
    }

    pub fn absolute_reference(&self) -> Result<Schedule, ParamError> {
        let offset = if self.reference.relative_to_object { self.object_angle()?.unwrap_or(0.0) } else { 0.0 };
        Ok(self.reference.schedule.map(|v| v + offset))
    }

    /// All scheduled events, time-ordered.
    pub fn events(&self) -> Result<Vec<ScenarioEvent>, ParamError> {
        let mut out = Vec::new();
        let reference = self.absolute_reference()?;
        let mut prev = reference.initial;
        for &(time, target) in &reference.steps {
            out.push(ScenarioEvent { time, kind: EventKind::Reference { target, step: target - prev } });
            prev = target;
        }
        if let ForceCommand::Profile(s) = &self.force {
            out.extend(s.steps.iter().map(|&(time, target)| ScenarioEvent { time, kind: EventKind::Force { target } }));
        }
        if let Some(o) = &self.object {
            out.extend(
                o.m_over_mu
                    .steps
                    .iter()
                    .map(|&(time, m)| ScenarioEvent { time, kind: EventKind::Mass { m_over_mu: m } }),
            );
        }
        out.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(out)
    }
}

/// Everything that evolves during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub step: u64,
    pub finger: ReducedState,
    pub object: ObjectState,
    pub phase: ControlPhase,
    pub estimator: Option<EstimatorState>,
    accel: AccelEstimator,
    f_d: f64,
}

impl WorldState {
    pub fn time(&self, dt: f64) -> f64 {
        self.step as f64 * dt
    }
}

/// Quantities held constant across one integration step.
#[derive(Debug, Clone, Copy)]
struct Held {
    targets: ControlTargets,
    phase: ControlPhase,
    object: Option<ObjectParams>,
    noise: f64,
}

pub struct Simulator<'a> {
    scenario: &'a Scenario,
    config: SimConfig,
    reference: Schedule,
    normal: Vector2<f64>,
    state: WorldState,
    rng: Option<(ChaCha8Rng, Normal<f64>)>,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario, config: SimConfig) -> Result<Self, SimError> {
        scenario.validate()?;
        config.validate()?;
        let theta_e = scenario.object_angle()?.unwrap_or(0.0);
        let theta1 = scenario.initial.theta1 + if scenario.initial.relative_to_object { theta_e } else { 0.0 };
        let estimator = match &scenario.force {
            ForceCommand::Reflex(r) => Some(EstimatorState::from_mass(r.m_hat0, r.alpha, r.bounds)?),
            ForceCommand::Profile(_) => None,
        };
        let cutoff = match &scenario.force {
            ForceCommand::Reflex(r) => r.params.accel_cutoff_hz,
            ForceCommand::Profile(_) => None,
        };
        let rng = (config.tau_c_noise > 0.0).then(|| {
            let normal = Normal::new(0.0, config.tau_c_noise).expect("validated standard deviation");
            (ChaCha8Rng::seed_from_u64(config.seed), normal)
        });
        Ok(Simulator {
            scenario,
            config,
            reference: scenario.absolute_reference()?,
            normal: scenario.contact.as_ref().map_or(Vector2::new(0.0, 1.0), |c| c.normal),
            state: WorldState {
                step: 0,
                finger: ReducedState::new(theta1, scenario.initial.theta1_dot),
                object: ObjectState { v: scenario.initial.v, s: 0.0 },
                phase: scenario.initial_phase,
                estimator,
                accel: AccelEstimator::new(cutoff),
                f_d: 0.0,
            },
            rng,
        })
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.state.time(self.config.dt)
    }

    fn contact_force_at(&self, theta1: f64) -> f64 {
        match &self.scenario.contact {
            Some(c) => contact_force(&reduced_fingertip(theta1, &self.scenario.finger), c),
            None => 0.0,
        }
    }

    fn coupling(&self, theta1: f64) -> f64 {
        coupling_unchecked(theta1, &self.normal, &self.scenario.finger)
    }

    /// Steps 1–3: events, sensing, phase and reflex. Returns the trace row for
    /// the current instant and the inputs held over the next step.
    fn sample(&mut self) -> Result<(TraceRow, Held), SimError> {
        let dt = self.config.dt;
        let k = self.state.step;
        let t = self.time();
        let sc = self.scenario;

        let object = sc
            .object
            .as_ref()
            .map(|o| ObjectParams { m_over_mu: o.m_over_mu.value_at_step(k, dt), gravity: o.gravity });

        let theta1 = self.state.finger.theta1;
        let f_e = self.contact_force_at(theta1);
        let h = self.coupling(theta1);
        let noise = match &mut self.rng {
            Some((rng, dist)) => dist.sample(rng),
            None => 0.0,
        };
        let tau_c = h * f_e + noise;
        self.state.phase = select_phase(tau_c, self.state.phase, &sc.thresholds);

        let f_d = match &sc.force {
            ForceCommand::Profile(s) => s.value_at_step(k, dt),
            ForceCommand::Reflex(r) => {
                let div = u64::from(self.config.reflex_divider);
                if k.is_multiple_of(div) {
                    let obj = object.expect("validated: reflex has an object");
                    let est = self.state.estimator.as_mut().expect("reflex has an estimator");
                    let v = self.state.object.v;
                    let v_dot = self.state.accel.update(v, dt * div as f64);
                    if v > r.params.slip_gate {
                        let eps = innovation(v_dot, obj.gravity, f_e, est);
                        *est = update_estimate(est, eps, f_e, dt * div as f64);
                    }
                    self.state.f_d = desired_force(est, v, obj.gravity, &r.params);
                }
                self.state.f_d
            }
        };
        let tau_d = desired_torque(f_d, h);
        let m_hat = self.state.estimator.map_or(0.0, |e| e.m_hat());

        let row = TraceRow {
            t,
            theta1,
            theta1_dot: self.state.finger.theta1_dot,
            tau_c,
            tau_d,
            f_e,
            f_d,
            v: self.state.object.v,
            m_hat,
            phase: self.state.phase,
        };
        for (name, val) in [("tau_c", tau_c), ("f_e", f_e), ("f_d", f_d), ("tau_d", tau_d), ("m_hat", m_hat)] {
            if !val.is_finite() {
                return Err(SimError::NonFinite { signal: name, t });
            }
        }
        let held = Held {
            targets: ControlTargets { theta1_ref: self.reference.value_at_step(k, dt), tau_d, ..Default::default() },
            phase: self.state.phase,
            object,
            noise,
        };
        Ok((row, held))
    }

    /// Time derivative of `(θ₁, θ̇₁, v, s)`.
    fn derivative(&self, y: &Vector4<f64>, held: &Held) -> Result<Vector4<f64>, SimError> {
        let finger = ReducedState::new(y[0], y[1]);
        let f_e = self.contact_force_at(finger.theta1);
        let h = self.coupling(finger.theta1);
        let tau_c_true = h * f_e;
        let tau_c_meas = tau_c_true + held.noise;
        let u = control_input(&finger, &held.targets, tau_c_meas, &self.scenario.impedance, held.phase, h)
            .map_err(|source| SimError::Control { t: self.time(), source })?;
        let tau = control_torque(&finger, u, tau_c_meas, &self.scenario.finger);
        let rd = reduce_dynamics(finger.theta1, finger.theta1_dot, &self.scenario.finger);
        let theta1_ddot = (tau - rd.c_prime * finger.theta1_dot - tau_c_true) / rd.d_prime;
        let v_dot = held.object.map_or(0.0, |o| slip_rate(y[2], f_e, &o));
        Ok(Vector4::new(y[1], theta1_ddot, v_dot, y[2]))
    }

    fn integrate(&mut self, held: &Held) -> Result<(), SimError> {
        let dt = self.config.dt;
        let s = &self.state;
        let y = Vector4::new(s.finger.theta1, s.finger.theta1_dot, s.object.v, s.object.s);
        let y1 = match self.config.integrator {
            Integrator::Rk4 => {
                let k1 = self.derivative(&y, held)?;
                let k2 = self.derivative(&(y + 0.5 * dt * k1), held)?;
                let k3 = self.derivative(&(y + 0.5 * dt * k2), held)?;
                let k4 = self.derivative(&(y + dt * k3), held)?;
                y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
            Integrator::SemiImplicitEuler => {
                let d = self.derivative(&y, held)?;
                let rate = y[1] + dt * d[1];
                let v = y[2] + dt * d[2];
                Vector4::new(y[0] + dt * rate, rate, v, y[3] + dt * v)
            }
        };
        let t_next = (self.state.step + 1) as f64 * dt;
        for (name, val) in [("theta1", y1[0]), ("theta1_dot", y1[1]), ("v", y1[2]), ("s", y1[3])] {
            if !val.is_finite() {
                return Err(SimError::NonFinite { signal: name, t: t_next });
            }
        }
        self.state.finger = ReducedState::new(y1[0], y1[1]);
        // slip clamp: friction stops the object, it does not lift it
        let v = if held.object.is_some() { y1[2].max(0.0) } else { y1[2] };
        self.state.object = ObjectState { v, s: y1[3] };
        self.state.step += 1;
        Ok(())
    }

    /// Advances one step and returns the row sampled at its start.
    pub fn step(&mut self) -> Result<TraceRow, SimError> {
        let (row, held) = self.sample()?;
        self.integrate(&held)?;
        Ok(row)
    }

    /// Samples the current instant without integrating.
    pub fn observe(&mut self) -> Result<TraceRow, SimError> {
        self.sample().map(|(row, _)| row)
    }
}

/// Number of integration steps covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> u64 {
    (duration / dt).round() as u64
}

/// Runs a scenario to completion. The trace holds one row per step plus the
/// final state.
pub fn run_scenario(scenario: &Scenario, config: &SimConfig) -> Result<Trace, SimError> {
    let mut sim = Simulator::new(scenario, *config)?;
    let n = step_count(scenario.duration, config.dt);
    let mut rows = Vec::with_capacity(n as usize + 1);
    for _ in 0..n {
        rows.push(sim.step()?);
    }
    rows.push(sim.observe()?);
    Ok(Trace { rows })
}

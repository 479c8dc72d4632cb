//! Flat `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment. Keys are dotted
//! (`finger.lengths_mm = 40, 30, 20`); lengths and masses are given in mm and
//! g and converted to SI on load. Lists are comma separated, schedules are
//! comma-separated `time_s:value` pairs. The full key reference lives in
//! [`KEYS`] and the README.
//!
//! A file is applied on top of a base scenario: a built-in named by
//! `scenario.base`, or `fig3_step` when absent.

use std::collections::HashSet;

use nalgebra::Vector2;
use thiserror::Error;

use crate::contact::ContactModel;
use crate::finger::InertiaModel;
use crate::impedance::{ControlPhase, ImpedanceFrame, ImpedanceMode};
use crate::scenarios;
use crate::sim::{ForceCommand, Integrator, ObjectSetup, ReflexSetup, Scenario, Schedule, SimConfig};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {key}: {message}")]
pub struct ConfigError {
    /// 1-based line number; 0 when the problem is not tied to one line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, key: &str, message: impl Into<String>) -> Self {
        ConfigError { line, key: key.to_owned(), message: message.into() }
    }
}

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("scenario.base", "built-in scenario to start from (fig3_step, fig4_force, fig6_slip)"),
    ("scenario.name", "name used for output files"),
    ("scenario.duration_s", "simulated time, s"),
    ("finger.lengths_mm", "proximal, middle, distal link lengths, mm"),
    ("finger.masses_g", "proximal, middle, distal link masses, g"),
    ("finger.inertia_model", "uniform_rod | point_mass_at_tip"),
    ("contact.enabled", "true | false"),
    ("contact.stiffness_n_per_m", "environment spring stiffness, N/m"),
    ("contact.surface_mm", "object surface position along the normal, mm"),
    ("contact.normal", "unit approach direction x, y"),
    ("object.enabled", "true | false"),
    ("object.m_over_mu_g", "initial mass/(friction coefficient), g"),
    ("object.m_over_mu_steps", "later values as time_s:grams pairs"),
    ("object.gravity_m_per_s2", "gravitational acceleration, m/s^2"),
    ("impedance.m", "desired inertia M"),
    ("impedance.b", "desired damping B"),
    ("impedance.k", "desired stiffness K (free space only)"),
    ("impedance.feedforward_accel", "true | false: include reference acceleration"),
    ("impedance.mode", "second_order | first_order"),
    ("impedance.velocity_gain", "velocity loop gain for first_order mode, 1/s"),
    ("impedance.frame", "contact_normal | joint: frame of the torque error"),
    ("phase.enter_threshold_nm", "contact torque that enters the contact phase, N*m"),
    ("phase.exit_threshold_nm", "contact torque below which contact is left, N*m"),
    ("phase.initial", "free_space | contact"),
    ("reference.theta1_rad", "initial free-space reference for theta1, rad"),
    ("reference.theta1_steps", "later references as time_s:rad pairs"),
    ("reference.relative_to_object", "true | false: references are offsets from the contact angle"),
    ("force.source", "profile | reflex"),
    ("force.profile_n", "initial desired force, N"),
    ("force.profile_steps", "later desired forces as time_s:N pairs"),
    ("reflex.b", "slip decay gain b, 1/s"),
    ("reflex.alpha", "adaptation gain alpha"),
    ("reflex.m_hat0_g", "initial mass/(friction coefficient) estimate, g"),
    ("reflex.m_hat_min_g", "lower clamp of the estimate, g"),
    ("reflex.m_hat_max_g", "upper clamp of the estimate, g"),
    ("reflex.accel_cutoff_hz", "low-pass cutoff on the slip acceleration, Hz, or none"),
    ("reflex.slip_gate_m_per_s", "adapt only while slip speed exceeds this, m/s"),
    ("initial.theta1_rad", "initial proximal angle, rad"),
    ("initial.theta1_dot_rad_per_s", "initial proximal rate, rad/s"),
    ("initial.v_m_per_s", "initial slip velocity, m/s"),
    ("initial.relative_to_object", "true | false: initial angle is an offset from the contact angle"),
    ("sim.dt_s", "integration step, s"),
    ("sim.integrator", "rk4 | semi_implicit_euler"),
    ("sim.seed", "seed for measurement noise"),
    ("sim.tau_c_noise_nm", "standard deviation of contact torque noise, N*m"),
    ("sim.reflex_divider", "run the reflex every N steps"),
];

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub entries: Vec<Entry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let known: HashSet<&str> = KEYS.iter().map(|(k, _)| *k).collect();
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| ConfigError::new(line, content, "expected `key = value`"))?;
            let key = key.trim();
            if !known.contains(key) {
                return Err(ConfigError::new(line, key, "unknown key"));
            }
            if !seen.insert(key.to_owned()) {
                return Err(ConfigError::new(line, key, "set more than once"));
            }
            entries.push(Entry { line, key: key.to_owned(), value: value.trim().to_owned() });
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Scenario named by `scenario.base`, or `fig3_step`.
    pub fn base(&self) -> Result<Scenario, ConfigError> {
        match self.get("scenario.base") {
            None => Ok(scenarios::fig3_step()),
            Some(e) => scenarios::builtin(&e.value)
                .ok_or_else(|| ConfigError::new(e.line, &e.key, format!("no built-in scenario named {:?}", e.value))),
        }
    }

    /// Applies every entry except `scenario.base` and validates the result.
    pub fn apply(&self, setup: &mut RunSetup) -> Result<(), ConfigError> {
        let mut b = Builder::from_setup(setup);
        for e in &self.entries {
            b.set(e)?;
        }
        *setup = b.finish()?;
        Ok(())
    }
}

/// A scenario together with its solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub scenario: Scenario,
    pub sim: SimConfig,
}

impl RunSetup {
    pub fn new(scenario: Scenario) -> Self {
        RunSetup { scenario, sim: SimConfig::default() }
    }
}

/// Loads a standalone config: its base scenario plus its own settings.
pub fn load(text: &str) -> Result<RunSetup, ConfigError> {
    let file = ConfigFile::parse(text)?;
    let mut setup = RunSetup::new(file.base()?);
    file.apply(&mut setup)?;
    Ok(setup)
}

/// Applies an override file on top of `setup`. Overrides cannot re-base.
pub fn apply_overrides(setup: &mut RunSetup, text: &str) -> Result<(), ConfigError> {
    let file = ConfigFile::parse(text)?;
    if let Some(e) = file.get("scenario.base") {
        return Err(ConfigError::new(e.line, &e.key, "only allowed in a scenario file"));
    }
    file.apply(setup)
}

/// Scenario decomposed into independently settable parts; optional blocks
/// keep their last settings while disabled.
struct Builder {
    scenario: Scenario,
    sim: SimConfig,
    contact: ContactModel,
    contact_on: bool,
    object: ObjectSetup,
    object_on: bool,
    profile: Schedule,
    reflex: ReflexSetup,
    use_reflex: bool,
    first_order: bool,
    velocity_gain: f64,
}

impl Builder {
    fn from_setup(setup: &RunSetup) -> Self {
        let sc = setup.scenario.clone();
        let (profile, reflex, use_reflex) = match &sc.force {
            ForceCommand::Profile(p) => (p.clone(), ReflexSetup::default(), false),
            ForceCommand::Reflex(r) => (Schedule::constant(0.0), r.clone(), true),
        };
        let (first_order, velocity_gain) = match sc.impedance.mode {
            ImpedanceMode::SecondOrder => (false, 1000.0),
            ImpedanceMode::FirstOrder { velocity_gain } => (true, velocity_gain),
        };
        Builder {
            first_order,
            velocity_gain,
            contact: sc.contact.clone().unwrap_or_default(),
            contact_on: sc.contact.is_some(),
            object: sc
                .object
                .clone()
                .unwrap_or(ObjectSetup { m_over_mu: Schedule::constant(0.05), gravity: scenarios::GRAVITY }),
            object_on: sc.object.is_some(),
            profile,
            reflex,
            use_reflex,
            sim: setup.sim,
            scenario: sc,
        }
    }

    fn set(&mut self, e: &Entry) -> Result<(), ConfigError> {
        let v = Value { entry: e };
        let sc = &mut self.scenario;
        match e.key.as_str() {
            "scenario.base" => {}
            "scenario.name" => {
                if e.value.is_empty() || e.value.contains(['/', '\\']) {
                    return Err(v.err("must be a non-empty file-name-safe string"));
                }
                sc.name = e.value.clone();
            }
            "scenario.duration_s" => sc.duration = v.positive()?,
            "finger.lengths_mm" => sc.finger.lengths = v.triple_positive()?.map(|x| x * 1e-3),
            "finger.masses_g" => sc.finger.masses = v.triple_positive()?.map(|x| x * 1e-3),
            "finger.inertia_model" => {
                sc.finger.inertia_model = v.choice(&[
                    ("uniform_rod", InertiaModel::UniformRod),
                    ("point_mass_at_tip", InertiaModel::PointMassAtTip),
                ])?
            }
            "contact.enabled" => self.contact_on = v.boolean()?,
            "contact.stiffness_n_per_m" => {
                self.contact.stiffness = v.positive()?;
                self.contact_on = true;
            }
            "contact.surface_mm" => {
                self.contact.surface_position = v.number()? * 1e-3;
                self.contact_on = true;
            }
            "contact.normal" => {
                let xs = v.list(2)?;
                let n = Vector2::new(xs[0], xs[1]);
                if (n.norm() - 1.0).abs() > 1e-9 {
                    return Err(v.err(format!("must have unit length (got {})", n.norm())));
                }
                self.contact.normal = n;
                self.contact_on = true;
            }
            "object.enabled" => self.object_on = v.boolean()?,
            "object.m_over_mu_g" => {
                self.object.m_over_mu.initial = v.positive()? * 1e-3;
                self.object_on = true;
            }
            "object.m_over_mu_steps" => {
                let steps = v.schedule()?;
                if steps.iter().any(|&(_, g)| g <= 0.0) {
                    return Err(v.err("masses must be positive"));
                }
                self.object.m_over_mu.steps = steps.into_iter().map(|(t, g)| (t, g * 1e-3)).collect();
                self.object_on = true;
            }
            "object.gravity_m_per_s2" => {
                self.object.gravity = v.non_negative()?;
                self.object_on = true;
            }
            "impedance.m" => sc.impedance.m = v.non_negative()?,
            "impedance.b" => sc.impedance.b = v.positive()?,
            "impedance.k" => sc.impedance.k = v.non_negative()?,
            "impedance.feedforward_accel" => sc.impedance.feedforward_accel = v.boolean()?,
            "impedance.mode" => self.first_order = v.choice(&[("second_order", false), ("first_order", true)])?,
            "impedance.velocity_gain" => self.velocity_gain = v.positive()?,
            "impedance.frame" => {
                sc.impedance.frame =
                    v.choice(&[("contact_normal", ImpedanceFrame::ContactNormal), ("joint", ImpedanceFrame::Joint)])?
            }
            "phase.enter_threshold_nm" => sc.thresholds.enter = v.positive()?,
            "phase.exit_threshold_nm" => sc.thresholds.exit = v.non_negative()?,
            "phase.initial" => {
                sc.initial_phase =
                    v.choice(&[("free_space", ControlPhase::FreeSpace), ("contact", ControlPhase::Contact)])?
            }
            "reference.theta1_rad" => sc.reference.schedule.initial = v.number()?,
            "reference.theta1_steps" => sc.reference.schedule.steps = v.schedule()?,
            "reference.relative_to_object" => sc.reference.relative_to_object = v.boolean()?,
            "force.source" => self.use_reflex = v.choice(&[("profile", false), ("reflex", true)])?,
            "force.profile_n" => self.profile.initial = v.non_negative()?,
            "force.profile_steps" => {
                let steps = v.schedule()?;
                if steps.iter().any(|&(_, f)| f < 0.0) {
                    return Err(v.err("forces must be non-negative"));
                }
                self.profile.steps = steps;
            }
            "reflex.b" => self.reflex.params.b = v.positive()?,
            "reflex.alpha" => self.reflex.alpha = v.non_negative()?,
            "reflex.m_hat0_g" => self.reflex.m_hat0 = v.positive()? * 1e-3,
            "reflex.m_hat_min_g" => self.reflex.bounds.min = v.positive()? * 1e-3,
            "reflex.m_hat_max_g" => self.reflex.bounds.max = v.positive()? * 1e-3,
            "reflex.accel_cutoff_hz" => {
                self.reflex.params.accel_cutoff_hz = if e.value == "none" { None } else { Some(v.positive()?) }
            }
            "reflex.slip_gate_m_per_s" => self.reflex.params.slip_gate = v.non_negative()?,
            "initial.theta1_rad" => sc.initial.theta1 = v.number()?,
            "initial.theta1_dot_rad_per_s" => sc.initial.theta1_dot = v.number()?,
            "initial.v_m_per_s" => sc.initial.v = v.number()?,
            "initial.relative_to_object" => sc.initial.relative_to_object = v.boolean()?,
            "sim.dt_s" => self.sim.dt = v.positive()?,
            "sim.integrator" => {
                self.sim.integrator =
                    v.choice(&[("rk4", Integrator::Rk4), ("semi_implicit_euler", Integrator::SemiImplicitEuler)])?
            }
            "sim.seed" => self.sim.seed = v.parse_as::<u64>("a non-negative integer")?,
            "sim.tau_c_noise_nm" => self.sim.tau_c_noise = v.non_negative()?,
            "sim.reflex_divider" => {
                let d = v.parse_as::<u32>("a positive integer")?;
                if d == 0 {
                    return Err(v.err("must be at least 1"));
                }
                self.sim.reflex_divider = d;
            }
            other => return Err(ConfigError::new(e.line, other, "unknown key")),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunSetup, ConfigError> {
        let mut scenario = self.scenario;
        scenario.contact = self.contact_on.then_some(self.contact);
        scenario.object = self.object_on.then_some(self.object);
        scenario.impedance.mode = if self.first_order {
            ImpedanceMode::FirstOrder { velocity_gain: self.velocity_gain }
        } else {
            ImpedanceMode::SecondOrder
        };
        scenario.force =
            if self.use_reflex { ForceCommand::Reflex(self.reflex) } else { ForceCommand::Profile(self.profile) };
        scenario.validate().map_err(|e| ConfigError::new(0, "scenario", e.to_string()))?;
        self.sim.validate().map_err(|e| ConfigError::new(0, "sim", e.to_string()))?;
        Ok(RunSetup { scenario, sim: self.sim })
    }
}

struct Value<'a> {
    entry: &'a Entry,
}

impl Value<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.entry.line, &self.entry.key, message)
    }

    fn parse_as<T: std::str::FromStr>(&self, what: &str) -> Result<T, ConfigError> {
        self.entry.value.parse().map_err(|_| self.err(format!("expected {what}, got {:?}", self.entry.value)))
    }

    fn number(&self) -> Result<f64, ConfigError> {
        parse_number(&self.entry.value)
            .ok_or_else(|| self.err(format!("expected a number, got {:?}", self.entry.value)))
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let x = self.number()?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.err(format!("must be positive (got {x})")))
        }
    }

    fn non_negative(&self) -> Result<f64, ConfigError> {
        let x = self.number()?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(self.err(format!("must be non-negative (got {x})")))
        }
    }

    fn list(&self, n: usize) -> Result<Vec<f64>, ConfigError> {
        let xs: Option<Vec<f64>> = self.entry.value.split(',').map(parse_number).collect();
        match xs {
            Some(xs) if xs.len() == n => Ok(xs),
            _ => Err(self.err(format!("expected {n} comma-separated numbers"))),
        }
    }

    fn triple_positive(&self) -> Result<[f64; 3], ConfigError> {
        let xs = self.list(3)?;
        if xs.iter().any(|&x| x <= 0.0) {
            return Err(self.err("all values must be positive"));
        }
        Ok([xs[0], xs[1], xs[2]])
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        self.choice(&[("true", true), ("false", false)])
    }

    fn choice<T: Copy>(&self, options: &[(&str, T)]) -> Result<T, ConfigError> {
        options.iter().find(|(name, _)| *name == self.entry.value).map(|&(_, t)| t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.err(format!("expected one of {}, got {:?}", names.join(", "), self.entry.value))
        })
    }

    fn schedule(&self) -> Result<Vec<(f64, f64)>, ConfigError> {
        let text = self.entry.value.as_str();
        if text.is_empty() || text == "none" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for item in text.split(',') {
            let pair = item
                .split_once(':')
                .and_then(|(t, x)| Some((parse_number(t)?, parse_number(x)?)))
                .ok_or_else(|| self.err(format!("expected time_s:value, got {:?}", item.trim())))?;
            out.push(pair);
        }
        Schedule::new(0.0, out.clone()).map_err(|e| self.err(e.to_string()))?;
        Ok(out)
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_units_convert_to_si() {
        let setup = load(
            "finger.lengths_mm = 40, 30, 20\n\
             finger.masses_g = 6.9580, 5.2185, 3.4790  # phalanges\n\
             contact.surface_mm = 50\n",
        )
        .unwrap();
        assert_eq!(setup.scenario.finger.lengths, [0.04, 0.03, 0.02]);
        assert!((setup.scenario.finger.masses[0] - 6.958e-3).abs() < 1e-15);
        assert_eq!(setup.scenario.contact.unwrap().surface_position, 0.05);
    }

    #[test]
    fn negative_stiffness_names_key_and_line() {
        let err = load("# comment\n\ncontact.stiffness_n_per_m = -5\n").unwrap_err();
        assert_eq!(err.key, "contact.stiffness_n_per_m");
        assert_eq!(err.line, 3);
        assert!(err.to_string().contains("contact.stiffness_n_per_m"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert_eq!(load("finger.length = 1").unwrap_err().message, "unknown key");
        let err = load("impedance.b = 1\nimpedance.b = 2\n").unwrap_err();
        assert_eq!((err.line, err.message.as_str()), (2, "set more than once"));
        assert!(load("just words").is_err());
    }

    #[test]
    fn base_and_overrides() {
        let mut setup =
            load("scenario.base = fig6_slip\nobject.m_over_mu_steps = 2:60\nscenario.duration_s = 4").unwrap();
        assert_eq!(setup.scenario.name, "fig6_slip");
        let obj = setup.scenario.object.as_ref().unwrap();
        assert_eq!(obj.m_over_mu.steps, vec![(2.0, 0.06)]);
        assert!(matches!(setup.scenario.force, ForceCommand::Reflex(_)));
        apply_overrides(&mut setup, "reflex.alpha = 100\nsim.dt_s = 2e-4\n").unwrap();
        assert_eq!(setup.sim.dt, 2e-4);
        match &setup.scenario.force {
            ForceCommand::Reflex(r) => assert_eq!(r.alpha, 100.0),
            other => panic!("{other:?}"),
        }
        assert!(apply_overrides(&mut setup, "scenario.base = fig3_step").is_err());
        assert!(load("scenario.base = fig9").is_err());
    }

    #[test]
    fn cross_field_problems_surface_at_the_end() {
        let err = load("force.source = reflex").unwrap_err();
        assert_eq!(err.key, "scenario");
        assert!(load("phase.enter_threshold_nm = 1e-6").is_err());
    }

    #[test]
    fn schedules_and_choices() {
        let s = load("reference.theta1_steps = 0.1:0.2, 0.3:0.4\nsim.integrator = semi_implicit_euler").unwrap();
        assert_eq!(s.scenario.reference.schedule.steps, vec![(0.1, 0.2), (0.3, 0.4)]);
        assert_eq!(s.sim.integrator, Integrator::SemiImplicitEuler);
        assert!(load("reference.theta1_steps = 0.3:0.2, 0.1:0.4").is_err());
        assert!(load("sim.integrator = euler").is_err());
        let fo = load("impedance.m = 0\nimpedance.mode = first_order\nimpedance.velocity_gain = 500").unwrap();
        assert_eq!(fo.scenario.impedance.mode, ImpedanceMode::FirstOrder { velocity_gain: 500.0 });
    }

    #[test]
    fn every_key_is_documented_once() {
        let mut seen = HashSet::new();
        for (k, doc) in KEYS {
            assert!(seen.insert(*k), "{k}");
            assert!(!doc.is_empty());
        }
    }
}

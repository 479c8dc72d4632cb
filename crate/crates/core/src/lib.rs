//! Simulation of a kinematically coupled three-link robotic finger holding an
//! object against a flat surface.
//!
//! The finger's three joints are tied together by two holonomic constraints,
//! leaving one degree of freedom. A two-phase impedance controller positions
//! the finger in free space and tracks a desired contact force once touching.
//! On top of it, a reflex estimates the object's mass-to-friction ratio online
//! and raises the grip force whenever the object starts to slip.
//!
//! Modules, bottom up:
//! - [`finger`]: kinematics, mass and Coriolis matrices, constraint reduction;
//! - [`contact`]: spring contact and object slip;
//! - [`impedance`]: phase logic and the impedance/computed-torque law;
//! - [`reflex`]: adaptive estimator and desired grip force;
//! - [`sim`], [`scenarios`]: closed-loop integration and built-in runs;
//! - [`trace`], [`summary`], [`config`]: CSV traces, run metrics, config files;
//! - [`cli`]: the `reflex-sim` command line.

pub mod cli;
pub mod config;
pub mod contact;
pub mod error;
pub mod finger;
pub mod impedance;
pub mod reflex;
pub mod scenarios;
pub mod sim;
pub mod summary;
pub mod trace;

pub use error::{ControlError, ParamError, SimError};
pub use sim::{run_scenario, Scenario, SimConfig};
pub use trace::{Trace, TraceRow};

use thiserror::Error;

/// A parameter block failed one of its invariants.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {name}: {reason} (got {value})")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: &'static str,
    pub value: f64,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, reason: &'static str, value: f64) -> Self {
        ParamError { name, reason, value }
    }
}

pub(crate) fn require(cond: bool, name: &'static str, reason: &'static str, value: f64) -> Result<(), ParamError> {
    if cond {
        Ok(())
    } else {
        Err(ParamError::new(name, reason, value))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("second-order impedance law requested with zero desired inertia")]
    ZeroInertia,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite {signal} at t = {t} s")]
    NonFinite { signal: &'static str, t: f64 },
    #[error("at t = {t} s: {source}")]
    Control { t: f64, source: ControlError },
    #[error("scenario is invalid: {0}")]
    Scenario(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

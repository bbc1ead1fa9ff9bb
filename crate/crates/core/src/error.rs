use thiserror::Error;

/// Errors raised by the simulation and inference layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("integration failed at t = {time:e} s: {reason}")]
    Integration { time: f64, reason: String },

    #[error("steady state not reached after {decay_times} decay times (last relative change {last_change:e})")]
    Convergence { decay_times: usize, last_change: f64 },

    #[error("degenerate contrast: both signal and reference contrasts are zero")]
    DegenerateContrast,

    #[error("measured population {measured:e} lies below the simulated floor {floor:e}")]
    FloorDominated { measured: f64, floor: f64 },

    #[error("inversion failed: {0}")]
    Inversion(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad user input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalConsistency(_)
                | Error::Integration { .. }
                | Error::Convergence { .. }
                | Error::Inversion(_)
                | Error::Fit(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

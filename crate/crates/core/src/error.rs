use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-supplied argument is malformed.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The operation is not defined for the current state (empty ensemble, zero histogram, ...).
    #[error("invalid state: {0}")]
    State(String),
    /// The measurement schedule is incompatible with the integrator.
    #[error("schedule error: {0}")]
    Schedule(String),
    /// The Fock-space truncation is too small for the requested operation.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// The master-equation step lost too much trace.
    #[error("step-size error: {0}")]
    StepSize(String),
    /// A measurement branch has (numerically) zero probability.
    #[error("renormalization error: {0}")]
    Renormalization(String),
}

impl Error {
    /// True for failures of numerical guards, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation(_) | Error::StepSize(_) | Error::Renormalization(_) | Error::State(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

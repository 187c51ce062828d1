//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on a parameter or state was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input was NaN or infinite where a finite value is required.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A requested iteration count exceeds the configured hard cap.
    #[error("iteration count {requested} exceeds cap {cap}")]
    IterationCap { requested: u64, cap: u64 },

    /// The requested big-float precision is too low for the computation.
    #[error("at least {needed} bits of precision required, got {got}")]
    InsufficientPrecision { needed: usize, got: usize },

    /// The adaptive integrator could not make progress.
    #[error("integrator step size collapsed at t = {t} (lambda = {lambda})")]
    StepSizeCollapse { t: f64, lambda: f64 },

    /// Evaluation at or beyond a finite-time singularity.
    #[error("evaluation at t = {t} is at or beyond the blow-up time t* = {t_star}")]
    BlowUp { t: f64, t_star: f64 },

    /// An internal numerical consistency check failed.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

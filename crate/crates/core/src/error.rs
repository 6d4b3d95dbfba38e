use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A coherent component does not fit in the requested Fock truncation.
    #[error("truncation loss {loss:.3e} for {what} exceeds tolerance {tolerance:.1e} at dim {dim} (need dim >= {needed})")]
    Truncation {
        what: String,
        dim: usize,
        needed: usize,
        loss: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot normalize a zero vector: {0}")]
    ZeroVector(String),

    #[error("zero-probability measurement outcome at x = {x} (density {density:.3e})")]
    ZeroProbability { x: f64, density: f64 },

    #[error("grid too narrow: probability mass deficit {deficit:.3e}")]
    GridTooNarrow { deficit: f64 },

    #[error("integrator exhausted its budget of {0} steps")]
    StepLimit(usize),

    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("density operator lost positivity: min eigenvalue {0:.3e}")]
    Positivity(f64),

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("truncation guard exhausted: {0}")]
    GuardExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter { name, reason: reason.into() }
}

use thiserror::Error;

/// Errors raised by the physics and inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inverse problem has no solution for the given inputs.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Observed values cannot be produced by the forward model.
    #[error("inconsistent observation: {reason} (residual {residual:.3e})")]
    InconsistentObservation { reason: String, residual: f64 },

    /// An integration did not reach the requested accuracy.
    #[error("accuracy error: relative power drift {drift:.3e} exceeds {tolerance:.1e} with {steps} steps")]
    Accuracy {
        drift: f64,
        tolerance: f64,
        steps: usize,
    },

    /// An approximation was requested outside its validity region.
    #[error("validity error: {0}")]
    Validity(String),

    /// A numerical routine failed (bracketing, convergence).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The linearized fluctuation analysis is above the oscillation threshold.
    #[error("operating point above threshold (headroom ratio {ratio:.4})")]
    ThresholdExceeded { ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

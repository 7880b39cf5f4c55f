//! Error types shared by all solver modules.

use thiserror::Error;

/// Errors produced by the solvers and their supporting numerics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on user-supplied arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The iteration matrix (or a user-supplied matrix) is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Newton's method did not reach the requested tolerance.
    ///
    /// Carries the last iterate and its residual norm so callers can inspect
    /// how far the solve got.
    #[error("Newton did not converge within {iterations} iterations (residual norm {residual_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        residual_norm: f64,
        last_iterate: Vec<f64>,
    },

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A relative quantity could not be formed because its denominator is zero.
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// A solver error that occurred at a specific time step of a longer run.
    #[error("step {index} (t = {time:.9e}): {source}")]
    AtStep {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Annotate an error with the step index and target time at which it occurred.
    pub fn at_step(self, index: usize, time: f64) -> Error {
        Error::AtStep {
            index,
            time,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

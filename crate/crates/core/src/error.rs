use thiserror::Error;

/// Errors raised by the numerical routines and the command-line surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("iteration did not converge after {iterations} steps: {what}")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("integer overflow computing {0}")]
    Overflow(String),
    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("series truncation failed: {0}")]
    Truncation(String),
    #[error("function evaluation produced a non-finite value at t = {t}")]
    Evaluation { t: f64 },
    #[error("function `{0}` is unbounded on [0, inf)")]
    Unbounded(String),
    #[error("derivative of order {order} unavailable for `{function}`")]
    MissingDerivative { function: String, order: usize },
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("degenerate quotient: {0}")]
    Degenerate(String),
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

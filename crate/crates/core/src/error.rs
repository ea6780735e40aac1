use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("linear system is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("inner iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    InnerNonConvergence { iterations: usize, residual: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

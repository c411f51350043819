use thiserror::Error;

/// Errors raised by the numerical and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixerError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("point is not on the probability simplex: {0}")]
    Simplex(String),
    #[error("bisection did not converge: {0}")]
    Convergence(String),
    #[error("state space too large for exact enumeration: {0}")]
    Size(String),
    #[error("sampled state outside the exact support: {0}")]
    Support(String),
    #[error("invalid parameter type: {0}")]
    Type(String),
}

pub type Result<T> = std::result::Result<T, MixerError>;

use thiserror::Error;

/// Errors raised by the solvers and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("point (r = {r}) lies outside the field domain")]
    OutOfDomain { r: f64 },

    #[error("source violates the zero-mean condition: mean = {mean:e}")]
    ZeroMeanViolation { mean: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}

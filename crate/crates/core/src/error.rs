use thiserror::Error;

/// Errors raised by the numerical routines and the batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("containment: {0}")]
    Containment(String),
    #[error("range: {0}")]
    Range(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("calibration drift {drift:.3e} exceeds {limit:.1e}")]
    Calibration { drift: f64, limit: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

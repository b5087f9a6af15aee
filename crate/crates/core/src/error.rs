//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has a negative eigenvalue {eigenvalue:.3e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("trace {trace} differs from 1 beyond tolerance")]
    TraceMismatch { trace: f64 },

    #[error("order out of domain: {0}")]
    Domain(String),

    #[error("numerical degradation: {0}")]
    NumericalDegradation(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

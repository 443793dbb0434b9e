use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis dimension {requested} exceeds the configured cap {cap} (modes={modes}, n_max={n_max})")]
    DimensionCap {
        requested: u128,
        cap: usize,
        modes: usize,
        n_max: usize,
    },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("`{what}` is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { what: &'static str, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{method} did not converge after {iterations} iterations (attained residual {residual:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("shifted operator is not positive definite at shift {shift}")]
    Indefinite { shift: f64 },

    #[error("dense operation requested on dimension {dim} above threshold {threshold}")]
    TooLargeForDense { dim: usize, threshold: usize },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

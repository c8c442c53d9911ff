//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by validation and construction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("not Hermitian (max |A - A^dag| entry = {violation:.3e}, tolerance {tol:.1e})")]
    NotHermitian { violation: f64, tol: f64 },

    #[error("not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is not 1 (got {trace:.12}, deviation {deviation:.3e})")]
    TraceNotOne { trace: f64, deviation: f64 },

    #[error("not a projector (max |P^2 - P| entry = {violation:.3e})")]
    NotIdempotent { violation: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: u128, cap: usize },

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("pmf is not normalized (sum = {sum:.15}, deviation {deviation:.3e})")]
    NotNormalized { sum: f64, deviation: f64 },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("conditioning event has zero probability: {0}")]
    ZeroConditioningEvent(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("enumeration of {count} items exceeds the cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by state validation, channel construction and the capacity routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid subsystem shape: {0}")]
    InvalidShape(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("channel is not classical: {0}")]
    NotClassical(String),

    #[error("channel is not a covariant extension: {0}")]
    NotCovariant(String),

    #[error("ensemble is invalid: {0}")]
    InvalidEnsemble(String),

    #[error("ensemble has no purifications")]
    MissingPurifications,

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

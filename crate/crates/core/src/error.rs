use thiserror::Error;

/// Errors raised by the state, channel and measurement routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2 (got {0})")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("shrinking factor {0} outside [0, 1]")]
    ShrinkOutOfRange(f64),

    #[error("fidelity {fidelity} outside [1/d, 1] for d = {d}")]
    FidelityOutOfRange { fidelity: f64, d: usize },

    #[error("copy counts must satisfy 1 <= N <= M (got N = {n}, M = {m})")]
    InvalidCopies { n: usize, m: usize },

    #[error("full-space size {size} exceeds guard {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("frame has {found} points, need at least {required}")]
    FrameTooSmall { found: usize, required: usize },

    #[error("frame does not resolve the target operator (residual {residual:e} > {tolerance:e})")]
    Infeasible { residual: f64, tolerance: f64 },

    #[error("probe has a vanishing Bloch vector")]
    ZeroBlochProbe,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("POVM file: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the matrix, evolution, observable, entanglement and fit layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported matrix dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid trace {0}")]
    InvalidTrace(f64),

    #[error("state is not normalized (trace {0})")]
    NotNormalized(f64),

    #[error("fully decayed state (trace {0:e})")]
    FullyDecayed(f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fraction defined only for Bell-diagonal states in this artifact (off-diagonal weight {0:e})")]
    NotBellDiagonal(f64),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

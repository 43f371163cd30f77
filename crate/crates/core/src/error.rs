use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported Hilbert-space dimension {0} (must be a power of two, at most 8)")]
    UnsupportedDim(usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("superoperator has imaginary residue {0:.3e}")]
    NonReal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target channel is not unitary (max deviation from orthogonality {0:.3e})")]
    NonUnitaryTarget(f64),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid library: {0}")]
    InvalidLibrary(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

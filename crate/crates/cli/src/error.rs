use thiserror::Error;

/// Failures surfaced to the shell, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input, bad configuration, or a physicality check that failed.
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error(transparent)]
    Core(#[from] gateset_forge::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NonConvergence(_) | CliError::Core(gateset_forge::Error::NonConvergence(_)) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

use thiserror::Error;

/// Failure classes with a frozen exit-code contract: 0 stable, 1 unstable,
/// then one code per class below.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::Analysis(_) => 4,
            CliError::Unsupported(_) => 5,
            CliError::Internal(_) => 6,
        }
    }
}

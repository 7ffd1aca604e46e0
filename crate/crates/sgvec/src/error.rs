use thiserror::Error;

/// Errors across the toolkit, grouped by how the CLI maps them to exit codes.
#[derive(Debug, Error)]
pub enum SgError {
    /// Invalid arguments or configuration (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// A precondition on an operation's inputs was violated (exit code 2).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent data on disk (exit code 3).
    #[error("data error: {0}")]
    Data(String),
    /// Input exceeds a size cap of an exact algorithm (exit code 4).
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SgError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SgError::Config(_) | SgError::Domain(_) => 2,
            SgError::Data(_) => 3,
            SgError::Capacity(_) => 4,
            SgError::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SgError>;

use thiserror::Error;

/// Failures of the experiment runner, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    #[error("usage: {0}")]
    Usage(String),

    /// The solver itself failed (exit 1).
    #[error("solver failed: {0}")]
    Solver(#[from] gradnorm::Error),

    /// Writing outputs failed (exit 1).
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Solver(_) | Self::Io(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

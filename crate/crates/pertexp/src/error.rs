use std::io;
use std::path::PathBuf;

use pertexp_core::Error as CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed system file {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for configuration problems, 3 for resonance, secular and existence failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::Parse { .. } => 2,
            CliError::Core(e) if e.is_expansion_failure() => 3,
            CliError::Core(e) => match e.root() {
                CoreError::InvalidInput(_)
                | CoreError::InvalidFrequency(_)
                | CoreError::DimensionMismatch { .. }
                | CoreError::IndexOutOfRange { .. } => 2,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

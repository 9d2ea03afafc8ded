use std::path::{Path, PathBuf};

use oscifour_core::Error as CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Solver(CoreError),

    #[error("{0}")]
    Oracle(CoreError),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::Config(message.into())
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// Errors raised while running the TF solver. Invalid parameters are
    /// reported as configuration errors, everything else as solver failures.
    pub fn from_solver(err: CoreError) -> Self {
        match err {
            CoreError::InvalidConfig(m) => Self::Config(m),
            CoreError::UnsupportedOrbit { .. } | CoreError::SingularPosition => {
                Self::Config(err.to_string())
            }
            other => Self::Solver(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Oracle(_) => 4,
            Self::Io { .. } => 5,
        }
    }

    /// Short machine-readable class used in the error line.
    pub fn class(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Solver(_) => "solver",
            Self::Oracle(_) => "oracle",
            Self::Io { .. } => "io",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

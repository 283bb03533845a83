//! Errors of the command-line layer and their process exit codes.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}{}: {message}", at_line(*line))]
    Config { path: String, line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}{}: {message}", at_line(*line))]
    Format { path: String, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] maxent_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("internal check failed: {0}")]
    Internal(String),
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(": line {line}")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 0 success, 2 configuration or input error, 3 capacity, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Invalid(_) | CliError::Format { .. } => 2,
            CliError::Core(e) if e.is_capacity() => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 2,
            CliError::Csv(_) | CliError::Json(_) | CliError::Internal(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

use std::process::ExitCode;

use projflow_core::Error as CoreError;
use thiserror::Error;

/// Stable process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    /// I/O or internal failure.
    Internal = 1,
    /// Unreadable or invalid configuration, unknown preset or suite, bad flag.
    Config = 2,
    /// The run stopped early: collapse, pseudoconvexity loss, stitching, non-finite values.
    NumericHalt = 3,
    /// A semipositive preset's monitored minimum fell below −tolerance.
    Positivity = 4,
    /// At least one suite check failed.
    SuiteFailure = 5,
    /// A CSV handed to `plot` lacks the run-directory columns.
    Schema = 6,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) | CliError::Core(CoreError::Config(_)) => Exit::Config,
            CliError::Schema(_) => Exit::Schema,
            _ => Exit::Internal,
        }
    }
}

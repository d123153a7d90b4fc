//! Failures split by exit status: configuration and usage problems exit
//! with 2 before any output file is created; check failures and mid-run
//! numerical aborts exit with 1.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Scenario-file problem, with the offending line and field when known.
    Config {
        path: String,
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    /// Command-line problem outside any scenario file.
    Usage(String),
    /// A check failed, or a run aborted at a checkpoint.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, line, field, message } => {
                write!(f, "{path}")?;
                if let Some(line) = line {
                    write!(f, ":{line}")?;
                }
                if let Some(field) = field {
                    write!(f, " ({field})")?;
                }
                write!(f, ": {message}")
            }
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Check(message) => write!(f, "{message}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

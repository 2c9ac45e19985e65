//! Command-line driver: configuration parsing, `simulate`, `validate` and
//! `bench`.

use std::path::{Path, PathBuf};

use tavis_core::Error;

pub mod config;
pub mod run;
pub mod validate;

pub use config::{parse_config, RunConfig, RunMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} validation checks failed")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Config(_) | Error::Usage(_) | Error::OracleGuard { .. }) => EXIT_USAGE,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_USAGE,
            CliError::ValidationFailed { .. } => EXIT_VALIDATION,
        }
    }

    /// Extra advice printed under the error message.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(Error::Divergence { .. }) => {
                Some("the bosonized comparator is unstable at this coupling; its moments grow without bound")
            }
            CliError::Core(e) if e.is_numerical() => Some("try a smaller dt_ns"),
            CliError::Core(Error::OracleGuard { .. }) => Some("use method = exp or method = linear at this size"),
            _ => None,
        }
    }
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?)
}

use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("solver: {0}")]
    Solver(accel_core::Error),

    #[error("certificate check failed: {0}")]
    Certificate(String),
}

impl CliError {
    /// Process exit code for each error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Certificate(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

impl From<accel_core::Error> for CliError {
    fn from(e: accel_core::Error) -> Self {
        use accel_core::Error as E;
        match e {
            E::InvalidParameter(m) => CliError::Config(m),
            E::Io { path, source } => CliError::Io { path: path.into(), source },
            other => CliError::Solver(other),
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("oracle returned a non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("line search diverged at iteration {iteration}: L = {lipschitz:e} exceeds the cap")]
    LineSearchDiverged { iteration: usize, lipschitz: f64 },

    #[error("a known optimum is required for {0}")]
    MissingOptimum(&'static str),

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

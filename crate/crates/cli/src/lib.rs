//! Experiment harness: TOML experiment configs, solver runs with trace and
//! summary output, the dampening table, trace certification and the
//! benchmark suite.

pub mod config;
pub mod error;
pub mod plot;
pub mod runner;
pub mod suite;
pub mod table2;

pub use config::{ExperimentConfig, Method, Overrides, SolverSpec};
pub use error::{CliError, Result};
pub use runner::{execute, run_experiment, RunOutcome, RunSummary};

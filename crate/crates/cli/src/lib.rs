//! Command-line experiment runner: named experiments, JSON configs, JSON-lines verdicts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;
pub mod verdict;

pub use config::{ExperimentConfig, RunPlan};
pub use error::CliError;
pub use runner::{run_plan, RunOptions};
pub use verdict::{Check, Relation, VerdictRecord};

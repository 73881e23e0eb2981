//! Experiment harness: configuration, paired-run orchestration, report and
//! CSV emission, and the built-in self-test.

pub mod config;
pub mod csvout;
pub mod report;
pub mod selftest;

pub use config::{ConfigError, ExperimentConfig};
pub use report::{run_single, run_validation, CliError, RunReport};

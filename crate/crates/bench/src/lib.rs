//! Experiment driver behind the `rsbq` command.

pub mod config;
pub mod plotdata;
pub mod run;

pub use config::{ConfigIssue, ExperimentConfig, ExperimentKind};
pub use run::{run, BenchError, RunOptions, RunOutcome};

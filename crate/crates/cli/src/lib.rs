//! Command-line harness: configuration, experiment drivers and structured
//! output for the `rossbylab` binary.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{load_config, parse_config, RunConfig, Subcommand};
pub use experiments::{run_experiment, ExperimentError};
pub use output::{emit_report, Summary};

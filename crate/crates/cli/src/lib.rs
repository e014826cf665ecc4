//! Configuration parsing and experiment orchestration for `nwidth-reach`.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig, Subcommand};
pub use run::{run, RunError, RunOutcome};

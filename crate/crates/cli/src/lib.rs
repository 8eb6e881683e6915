//! Batch runner for the index checks: configuration, execution and report emission.

pub mod checks;
pub mod config;
pub mod emit;
pub mod potential;
pub mod report;
pub mod runner;

pub use config::{parse_config, ConfigError, ScenarioConfig, ScenarioKind};
pub use report::{Outcome, Quantity, Record, RunReport};
pub use runner::{run, RunOptions};

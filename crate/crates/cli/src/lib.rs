//! Scenario parsing, the `dcvr` subcommands and their CSV output.

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::{run, Command, Report, RunOptions};
pub use scenario::{parse_scenario, Scenario, ScenarioError};

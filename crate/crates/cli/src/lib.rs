//! Scenario front end for the `wgcorr` simulator: configuration, named
//! presets, and the file outputs of a run.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod units;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use presets::{preset, presets};
pub use run::{run_scenario, RunReport};

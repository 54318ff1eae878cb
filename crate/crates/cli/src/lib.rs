//! Experiment harness for the fracwave solver: convergence ladders,
//! fast-vs-direct timing, SOE tables, CSV and SVG output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use cli::run_cli;
pub use config::RunConfig;
pub use error::CliError;

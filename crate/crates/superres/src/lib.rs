//! Command-line front end, configuration layering, tables and
//! experiment records for `superres-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod parallel;
pub mod record;
pub mod table;

pub use error::{CliError, CliResult};

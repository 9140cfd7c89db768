//! Command line driver for `adaptive-dg-core`: mesh and result file formats,
//! the `run`, `verify` and `sweep` subcommands and their exit codes.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;

pub use error::{CliError, CliResult};

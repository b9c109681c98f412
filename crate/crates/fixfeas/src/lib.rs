//! JSON configuration, CSV/JSON/markdown output and the subcommands behind the
//! `fixfeas` binary.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use error::{CliError, CliResult};

//! File formats and subcommands of the `dod` tool.

pub mod check;
pub mod commands;
pub mod error;
pub mod files;
pub mod output;
pub mod poset_file;

pub use error::{CliError, Result};

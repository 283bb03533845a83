//! File formats, configuration, experiment runners and the command line for
//! the `maxent-core` decoding library.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod output;
pub mod runner;
pub mod studies;

pub use error::{CliError, Result};

//! Experiment harness around `platoon-core`: config files, file formats, and
//! the `platoon` command-line interface.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{CliError, Result};

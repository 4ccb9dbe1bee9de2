//! Command-line front end: configured optimizer runs with CSV, JSON and
//! SVG outputs, re-evaluation of stored metrics and closed-form bounds.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod metric_file;
pub mod output;
pub mod plot;

pub use error::{CliError, Result};

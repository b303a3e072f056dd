//! Command-line plumbing for chained transfer experiments: JSON configs,
//! run manifests, CSV tables and SVG reports.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod format;
pub mod manifest;
pub mod report;

pub use error::{CliError, CliResult};

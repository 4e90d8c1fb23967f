//! Instance files, experiment commands and sweep runner for `shortcut-core`.

pub mod bench;
pub mod commands;
pub mod io;

pub use commands::{Artifacts, CliError, Family};

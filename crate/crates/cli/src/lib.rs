//! The `reltime` command-line tool.
//!
//! Every subcommand reads its inputs from files, writes its outputs to files
//! or stdout, and leaves a JSON run manifest recording the fully resolved
//! configuration. Exit codes: 0 success, 1 runtime failure, 2 usage or
//! configuration error.

pub mod args;
mod commands;
mod io;
mod manifest;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use args::Cli;
pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or parameter values.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on stderr.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// `<path>.<suffix>`, keeping the full file name of `path`.
pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

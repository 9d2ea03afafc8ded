//! Command-line driver for `oscifour-core`: run configuration, coefficient
//! files, and CSV output for the `solve`, `eval`, `errors` and `averaged`
//! commands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod files;
pub mod problem;

use std::io::Write;
use std::path::Path;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Eval,
    Errors,
    Averaged,
}

/// Loads the config at `path`, applies `overrides` and runs `command`.
pub fn run(
    command: Command,
    path: &Path,
    out: Option<&Path>,
    overrides: &[String],
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = RunConfig::load(&text, overrides)?;
    if let Some(out) = out {
        cfg.out = Some(out.display().to_string());
    }
    match command {
        Command::Solve => commands::cmd_solve(&cfg, stdout),
        Command::Eval => commands::cmd_eval(&cfg, stdout),
        Command::Errors => commands::cmd_errors(&cfg, stdout),
        Command::Averaged => commands::cmd_averaged(&cfg, stdout),
    }
}

//! Command-line front end: `blocking`, `decide`, `sweep`, `simulate` and
//! `forecast`.

pub mod args;
mod commands;
pub mod config;
pub mod manifest;

use std::fmt;
use std::io::Write;

use anyhow::Result;

use args::{Cli, Command};

/// Invalid command-line input found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit status for an error returned by [`run`]: 2 for usage errors (as for
/// parse errors), 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}

/// The reader went away (e.g. `| head`); not a failure of the command.
pub fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

/// Runs one command, writing its result to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Blocking(a) => commands::blocking(cli, out, a),
        Command::Decide(a) => commands::decide(cli, out, a),
        Command::Sweep(a) => commands::sweep_cmd(cli, out, a),
        Command::Simulate(a) => commands::simulate(cli, out, a),
        Command::Forecast(a) => commands::forecast(cli, out, a),
    }?;
    out.flush()?;
    Ok(())
}

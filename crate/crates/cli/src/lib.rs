//! Command-line front end for `bragg-core`: configuration, threading and
//! file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

use crate::config::{load_and_merge, resolve, RunConfig};
use crate::error::{CliError, CliResult};
use crate::exec::Rayon;

#[derive(Debug, Parser)]
#[command(name = "bragg", version, about = "Collective Bragg scattering of a driven emitter array into a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Right-mode rate versus detuning at a fixed angle.
    Spectrum(RunConfig),
    /// Right-mode rate over an (angle, detuning) grid.
    Map(RunConfig),
    /// Peak detuning and rate versus N, with power-law fits.
    Scaling(RunConfig),
    /// Bragg orders, angles, phase alias and N-scaling regime.
    Bragg(RunConfig),
    /// Statistics of randomly voided arrays.
    Voids(RunConfig),
    /// Compares the linear solve with the master equation for small N.
    OracleCheck(RunConfig),
}

impl Command {
    pub fn split(self) -> (&'static str, RunConfig) {
        match self {
            Command::Spectrum(c) => ("spectrum", c),
            Command::Map(c) => ("map", c),
            Command::Scaling(c) => ("scaling", c),
            Command::Bragg(c) => ("bragg", c),
            Command::Voids(c) => ("voids", c),
            Command::OracleCheck(c) => ("oracle-check", c),
        }
    }
}

fn execute(command: &str, flags: &RunConfig, stdout: &mut dyn Write) -> CliResult<Option<String>> {
    let merged = load_and_merge(flags)?;
    let resolved = resolve(command, &merged)?;
    let exec = Rayon::new(resolved.threads)?;
    let outcome = commands::run_command(&resolved, &exec)?;
    let text = output::render(&outcome.table, command, &resolved.echo, resolved.format)?;
    match &resolved.output {
        Some(path) => output::write_atomic(path, &text)?,
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("writing output", e))?,
    }
    Ok(outcome.failure)
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => 1,
            };
        }
    };
    let (command, flags) = cli.command.split();
    match execute(command, &flags, stdout) {
        Ok(None) => 0,
        Ok(Some(failure)) => {
            let _ = writeln!(stderr, "bragg {command}: {failure}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "bragg {command}: {e}");
            e.exit_code()
        }
    }
}

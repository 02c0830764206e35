//! `floquet-eikonal`: cross sections and amplitudes of the shaking square well
//! from the eikonal approximation and the exact solver.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric non-convergence,
//! 4 partial sweep failure, 5 validation failure.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, Settings};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<floquet_eikonal::Error> for CliError {
    fn from(e: floquet_eikonal::Error) -> Self {
        Self { code: if e.is_numeric() { 3 } else { 2 }, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "floquet-eikonal", version, about = "Floquet scattering off a shaking spherical square well")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Total cross section at one parameter point.
    Sigma(Settings),
    /// Total cross section along one parameter axis.
    Sweep(Settings),
    /// Amplitude table f_n(θ) for one channel.
    Amplitude(Settings),
    /// Built-in consistency checks.
    Validate(Settings),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Sigma(s) => commands::sigma(&RunConfig::resolve(&s)?).map(|_| 0),
        Command::Sweep(s) => commands::sweep(&RunConfig::resolve(&s)?).map(|failed| if failed > 0 { 4 } else { 0 }),
        Command::Amplitude(s) => commands::amplitude(&RunConfig::resolve(&s)?).map(|_| 0),
        Command::Validate(s) => commands::validate(&RunConfig::resolve(&s)?).map(|ok| if ok { 0 } else { 5 }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

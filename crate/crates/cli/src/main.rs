//! `odo-kit`: operational diversity order from the command line.
//!
//! Subcommands: `odo` (single-point report), `sweep` (grid to CSV),
//! `figure` (reproduce the data bundles behind the six reference figures),
//! `validate` (run the built-in consistency checks).
//!
//! Exit codes: 0 ok, 1 validation failure or I/O error, 2 usage error,
//! 3 numeric-range refusal.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use odo_core::OdoError;

mod cmd_odo;
mod figure;
mod model_args;
mod output;
mod sweep;
mod validate;

use model_args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are success paths
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    init_thread_pool();

    let result = match cli.command {
        Command::Odo(args) => cmd_odo::run(&args),
        Command::Sweep(args) => sweep::run(&args),
        Command::Figure(args) => figure::run(&args),
        Command::Validate(args) => validate::run(&args),
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// ODOKIT_THREADS caps the worker count; unset means the hardware default.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("ODOKIT_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Core(OdoError::NumericRange(_))
        | CliError::Core(OdoError::QuadratureNonConvergence(_)) => 3,
        CliError::Core(_) | CliError::Usage(_) => 2,
        CliError::Io(_) => 1,
    }
}

/// Errors a subcommand can surface, each mapped to a documented exit code.
#[derive(Debug)]
pub enum CliError {
    Core(OdoError),
    Usage(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<OdoError> for CliError {
    fn from(e: OdoError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult = Result<ExitCode, CliError>;

//! `eqmeas`: command-line driver for equilibrium-measure experiments.
//!
//! Exit codes: 0 on success, 1 on a domain (computation) error, 2 on a
//! usage error. All diagnostics go to standard error; data goes to `--out`
//! or standard output.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("eqmeas: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(message)) => {
            eprintln!("eqmeas: {message}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<(), CliError> {
    let argv: Vec<String> = std::env::args().collect();
    let tokens = args::with_injected_defaults(argv)?;
    // clap prints its own message and exits: code 2 for bad usage (naming
    // the offending token), 0 for --help/--version.
    let cli = Cli::try_parse_from(&tokens).unwrap_or_else(|e| e.exit());
    commands::configure_threads(cli.threads)?;
    commands::dispatch(cli.command)
}

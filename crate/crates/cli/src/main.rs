#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, Result};

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("GAROUTER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("GAROUTER_THREADS must be a positive integer, got `{value}`")))?;
    garouter_core::exec::configure_threads(threads);
    Ok(())
}

fn run() -> Result<()> {
    let argv = config::expand(std::env::args().collect())?;
    let cli = Cli::parse_from(argv);
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Map(a) => commands::map(a),
        Command::Verify(a) => commands::verify(a),
        Command::Period(a) => commands::period(a),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

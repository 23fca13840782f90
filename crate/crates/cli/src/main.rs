//! `travesty` command-line tool.
//!
//! Exit status: 0 on success, 1 on a domain or I/O failure, 2 on a usage error.

mod args;
mod commands;
mod manifest;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Roc(a) => commands::roc(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Respond(a) => commands::respond(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! `yamabe`: solve, classify, inspect and verify gradient Yamabe soliton
//! profiles on warped products.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod table;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Classify(a) => commands::classify_cmd(a),
        Command::Curvature(a) => commands::curvature(a),
        Command::Verify(a) => commands::verify(a),
        Command::PlotData(a) => commands::plot_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("yamabe: {e}");
            e.exit_code()
        }
    }
}

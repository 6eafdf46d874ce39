//! `qrand`: batch front end for capacity computations, protocol runs,
//! random-binning sweeps and converse audits.
//!
//! Exit codes: 0 ok, 1 property violation, 2 input validation,
//! 3 non-convergence (report still written), 4 infeasible size.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig, MAX_DIM_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::new(cli, std::env::var(MAX_DIM_ENV).ok()).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qrand: {}", e.message);
            ExitCode::from(e.exit as u8)
        }
    }
}

//! `hfvol` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 when an
//! estimation or simulation fails at run time.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::output::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate::run(&cli.global, a),
        Command::Estimate(a) => commands::estimate::run(&cli.global, a),
        Command::Acf(a) => commands::acf::run(&cli.global, a),
        Command::Mc(a) => commands::mc::run(&cli.global, a),
        Command::Ingest(a) => commands::ingest::run(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

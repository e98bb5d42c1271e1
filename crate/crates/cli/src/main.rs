//! `fraudstream` command-line front end.

mod args;
mod common;
mod compare;
mod config;
mod gen;
mod static_cmd;
mod stream_cmd;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use common::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen::run(&a),
        Command::Static(a) => static_cmd::run(&a),
        Command::Stream(a) => stream_cmd::run(&a),
        Command::Compare(a) => compare::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand_config(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // Help and version go to stdout with status 0; usage errors exit 2.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

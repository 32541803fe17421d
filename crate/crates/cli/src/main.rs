use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;

use args::Cli;
use commands::Failure;

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "CAVITRAP_THREADS";

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `pdc-kerr` command-line front end.
//!
//! Exit codes: 0 success, 1 computation or validation failure, 2 usage or
//! configuration error. Worker threads follow `RAYON_NUM_THREADS`.

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error with a specific exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Compute(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(a) => run::spectrum(a),
        Command::Evolve(a) => run::evolve(a),
        Command::Validate(a) => run::validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

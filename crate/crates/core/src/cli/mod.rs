//! Command-line front end.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io;

use clap::error::ErrorKind;
use clap::Parser;

use crate::error::Error;
use config::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("i/o error: {0}")]
    Io(io::Error),
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Usage(s)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Domain(Error::InvalidParameter(_)) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match &cli.command {
        Command::Coeffs(a) => commands::coeffs(a).map(|_| true),
        Command::PhaseDist(a) => commands::phase_dist(a).map(|_| true),
        Command::Stats(a) => commands::stats(a).map(|_| true),
        Command::Wigner(a) => commands::wigner(a).map(|_| true),
        Command::Sweep(a) => commands::sweep(a).map(|_| true),
        Command::Figure(a) => figures::figure(a).map(|_| true),
        Command::Verify(a) => verify::verify(a),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

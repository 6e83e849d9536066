//! Command-line front end: `simulate`, `estimate`, `power` and `verify`.
//!
//! Exit codes: 0 on success, 1 when estimation or verification fails,
//! 2 for usage and configuration errors.

mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

use bracketlab_core::estimators::EstimError;
use bracketlab_core::experiment::{DataError, SimError};

pub use args::{Cli, Command, EstimateKind, SuiteArg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("simulation: {0}")]
    Simulation(#[from] SimError),
    #[error("{context}: {source}")]
    Estimation { context: String, source: EstimError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Dispatches a parsed command line, writing human-readable output to `out`.
/// Returns the exit code for runs that complete.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<u8, CliError> {
    match &cli.command {
        Command::Simulate {
            config,
            out: path,
            seed,
            threads,
        } => commands::simulate(config, path.as_deref(), *seed, *threads, out),
        Command::Estimate {
            kind,
            data,
            out: prefix,
            config,
            censor_limit,
            continuity,
            keep_inconsistent,
        } => {
            let mut options = match config {
                Some(path) => config::RunConfig::load(path)?.estimate,
                None => config::EstimateOptions::default(),
            };
            if let Some(limit) = censor_limit {
                options.censor_limit = *limit;
            }
            options.continuity |= *continuity;
            if *keep_inconsistent {
                options.drop_inconsistent = false;
            }
            commands::estimate(*kind, data, prefix.as_deref(), &options, out)
        }
        Command::Power {
            d,
            alpha,
            power,
            ratio,
            are,
        } => commands::power(*d, *alpha, *power, *ratio, *are, out),
        Command::Verify { suite } => commands::verify(*suite, out),
    }
}

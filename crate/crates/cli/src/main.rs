mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;
use ladcd::LadError;

use args::{Cli, Command};

/// Failure classes, each with a fixed exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input data: 2.
    Invalid(String),
    /// `--strict` and the sweep budget ran out: 3.
    NotConverged(String),
    /// `oracle --check` disagreed with the report: 4.
    CheckFailed(String),
    /// Could not write an output file: 1.
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Output(_) => 1,
            Self::Invalid(_) => 2,
            Self::NotConverged(_) => 3,
            Self::CheckFailed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Invalid(m) => write!(f, "invalid input: {m}"),
            Self::NotConverged(m) => write!(f, "not converged: {m}"),
            Self::CheckFailed(m) => write!(f, "check failed: {m}"),
            Self::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<LadError> for CliError {
    fn from(e: LadError) -> Self {
        match e {
            LadError::Io(m) => Self::Output(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

/// `LADCD_THREADS` caps the worker pool used by replicate, bench and
/// multi-start.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LADCD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Invalid(format!("LADCD_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Replicate(a) => commands::replicate(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Oracle(a) => commands::oracle(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ladcd: {e}");
            ExitCode::from(e.code())
        }
    }
}

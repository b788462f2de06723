//! Batch front end: spectra, dictionary fits and the paper example pipelines.

mod fit_cmd;
mod manifest;
mod reproduce;
mod spectrum_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Exit code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    AcceptanceFailed = 1,
    InputError = 2,
    NumericalFailure = 3,
}

/// Error carrying its exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { status: Status::InputError, message: message.into() }
    }
}

impl From<ssmfrac::Error> for CliError {
    fn from(e: ssmfrac::Error) -> Self {
        use ssmfrac::Error as E;
        let status = match e {
            E::NotHyperbolic { .. }
            | E::WrongShape(_)
            | E::DomainError(_)
            | E::InsufficientData { .. }
            | E::LengthMismatch(..)
            | E::OutOfRange { .. }
            | E::UnknownTestbed(_)
            | E::BadParams(_)
            | E::OutOfDomain(_)
            | E::OutOfRadius { .. }
            | E::RatioOutOfRange(_)
            | E::Parse(_)
            | E::Io(_) => Status::InputError,
            _ => Status::NumericalFailure,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ssmfrac", version, about = "Fractional and mixed-mode spectral submanifolds")]
struct Cli {
    /// JSON file whose fields override the command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition a spectrum and report ratios, resonances and smoothness.
    Spectrum(spectrum_cmd::SpectrumArgs),
    /// Fit a reduced model over a fractional (or integer) dictionary.
    Fit(fit_cmd::FitArgs),
    /// Run a full example pipeline with its acceptance checks.
    Reproduce(reproduce::ReproduceArgs),
}

/// Replace flag values by the fields present in the config file.
fn apply_config<T: Serialize + DeserializeOwned>(args: T, config: Option<&PathBuf>) -> CliResult<T> {
    let Some(path) = config else { return Ok(args) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let overrides: serde_json::Value = serde_json::from_str(&text)?;
    let serde_json::Value::Object(overrides) = overrides else {
        return Err(CliError::input("config file must hold a JSON object"));
    };
    let mut merged = serde_json::to_value(args)?;
    if let serde_json::Value::Object(m) = &mut merged {
        for (k, v) in overrides {
            if !m.contains_key(&k) {
                return Err(CliError::input(format!("unknown config field '{k}'")));
            }
            m.insert(k, v);
        }
    }
    Ok(serde_json::from_value(merged)?)
}

/// Worker threads from `SSMFRAC_THREADS`, defaulting to the available cores.
pub fn thread_budget() -> usize {
    std::env::var("SSMFRAC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(cli: Cli) -> CliResult<Status> {
    let config = cli.config.as_ref();
    match cli.command {
        Command::Spectrum(a) => spectrum_cmd::run(apply_config(a, config)?),
        Command::Fit(a) => fit_cmd::run(apply_config(a, config)?),
        Command::Reproduce(a) => reproduce::run(apply_config(a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::InputError as u8 } else { Status::Ok as u8 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.status as u8)
        }
    }
}

//! Batch front-end behind the `mweyl` binary.
//!
//! `mweyl <subcommand> --config <path> [--out <path>] [--seed <n>]` reads a
//! JSON [`RunConfig`], runs one computation and writes either a JSON report
//! (`config`, `results`, `errors`, `version`) or a CSV table with a JSON
//! sidecar `<out>.meta.json` carrying the same report fields.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical failure,
//! 1 for I/O failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;

pub use config::{
    Angles, CommandConfig, EpsSchedule, Format, GreenCase, LambdaGrid, OutputConfig, PairConfig, ProblemConfig,
    RunConfig, SuiteConfig,
};
pub use output::{write_atomic, Table};

#[derive(Debug, Parser)]
#[command(
    name = "mweyl",
    version,
    about = "Weyl M-functions and resolvents of Hain-Lust operators"
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized suites and probes; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Green identity residuals for pairs of test functions.
    Green,
    /// M-matrix over a spectral grid (CSV).
    Mscan,
    /// Eigenvalues in a rectangle by the argument principle.
    Eig,
    /// Laurent data and pole orders at a contour center.
    Laurent,
    /// Krein resolvent formula check.
    Krein,
    /// Boundary-triplet identity checks, explicit or as a seeded random suite.
    Identities,
    /// Boundary limits on the essential spectrum.
    Limits,
    /// One resolvent application sampled on an x grid (CSV).
    Resolvent,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Green => "green",
            Command::Mscan => "mscan",
            Command::Eig => "eig",
            Command::Laurent => "laurent",
            Command::Krein => "krein",
            Command::Identities => "identities",
            Command::Limits => "limits",
            Command::Resolvent => "resolvent",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Mscan | Command::Resolvent => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// A failure with the config field it concerns, if any.
#[derive(Debug)]
pub enum CliError {
    Input { field: String, error: Error },
    Numerical(Error),
    Io(String),
}

impl CliError {
    pub fn field(field: &str, error: Error) -> Self {
        CliError::Input {
            field: field.to_string(),
            error,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        match self {
            CliError::Input { field, error } => ErrorRecord {
                module: error.module().to_string(),
                kind: error.kind().to_string(),
                field: Some(field.clone()),
                message: error.to_string(),
            },
            CliError::Numerical(error) => ErrorRecord::from(error),
            CliError::Io(msg) => ErrorRecord {
                module: "cli".into(),
                kind: "io".into(),
                field: None,
                message: msg.clone(),
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { field, error } => write!(f, "{field}: {error}"),
            CliError::Numerical(error) => write!(f, "{}: {error}", error.module()),
            CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

/// Numerical errors are input errors when they come from bad input.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::field("command", e)
        } else {
            CliError::Numerical(e)
        }
    }
}

/// Serialized form of an error in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub module: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            module: e.module().to_string(),
            kind: e.kind().to_string(),
            field: None,
            message: e.to_string(),
        }
    }
}

/// Top-level JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub config: Option<&'a RunConfig>,
    pub results: Option<T>,
    pub errors: Vec<ErrorRecord>,
    pub version: &'static str,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of a subcommand before it is written out.
pub enum Outcome {
    Json(serde_json::Value, Vec<ErrorRecord>),
    Table(Table, Vec<ErrorRecord>),
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::field("--config", Error::Invalid("a config file is required".into())))?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::field(
            "--config",
            Error::Invalid(format!("cannot read {}: {e}", path.display())),
        )
    })?;
    let mut cfg = RunConfig::from_json(&text)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.display().to_string());
    }
    let format = cfg.output.format.unwrap_or(args.command.default_format());
    if format == Format::Csv && args.command.default_format() != Format::Csv {
        return Err(CliError::field(
            "output.format",
            Error::Invalid(format!("`{}` writes JSON only", args.command.name())),
        ));
    }
    cfg.output.format = Some(format);
    Ok(cfg)
}

fn emit(cfg: Option<&RunConfig>, outcome: Result<Outcome, CliError>) -> Result<(), CliError> {
    let path = cfg.and_then(|c| c.output.path.clone()).map(PathBuf::from);
    let report = |results: Option<serde_json::Value>, errors: Vec<ErrorRecord>| Report {
        config: cfg,
        results,
        errors,
        version: VERSION,
    };
    match outcome {
        Ok(Outcome::Json(results, errors)) => output::write_json(path.as_deref(), &report(Some(results), errors)),
        Ok(Outcome::Table(table, errors)) => {
            let format = cfg.and_then(|c| c.output.format).unwrap_or(Format::Csv);
            if format == Format::Json {
                return output::write_json(path.as_deref(), &report(Some(table.to_json()), errors));
            }
            output::write_csv(path.as_deref(), &table)?;
            if let Some(p) = path {
                output::write_json(Some(&output::sidecar(&p)), &report(None, errors))?;
            }
            Ok(())
        }
        Err(e) => {
            let failed = report(None, vec![e.record()]);
            if let Some(p) = path {
                let target = match cfg.and_then(|c| c.output.format) {
                    Some(Format::Csv) => output::sidecar(&p),
                    _ => p,
                };
                output::write_json(Some(&target), &failed)?;
            }
            Err(e)
        }
    }
}

/// Runs one invocation and maps the outcome to an exit status.
pub fn run(args: &Args) -> ExitCode {
    let result = match load(args) {
        Ok(cfg) => {
            let outcome = commands::execute(args.command, &cfg);
            emit(Some(&cfg), outcome)
        }
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::to_string(&e.record()).unwrap_or_default();
            eprintln!("error: {e}");
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a subcommand on an already parsed config, without writing anything.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    commands::execute(command, cfg)
}

//! Command-line front end of `maglab-core`.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! exit code with everything destined for stdout and stderr, so the binary
//! and the tests share one code path.

pub mod args;
mod commands;
pub mod input;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use thiserror::Error;

use args::{Cli, Command, Format};
use output::{to_csv, to_json, Artifact};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub const TOL_ENV: &str = "MAGLAB_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Domain(#[from] maglab_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Domain(e) => e.name(),
            CliError::Io(_) => "IoError",
        }
    }

    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct ErrorPayload<'a> {
    error: &'a str,
    message: String,
}

/// Runs one invocation; `argv[0]` is the program name. The tolerance
/// override is read from `MAGLAB_TOL`.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_tol = std::env::var(TOL_ENV).ok();
    run_with_env(argv, env_tol.as_deref())
}

pub fn run_with_env<I, T>(argv: I, env_tol: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Outcome {
                code: EXIT_OK,
                stdout: e.to_string(),
                stderr: String::new(),
            };
        }
        Err(e) => {
            let text = e.to_string();
            let message = text.trim().trim_start_matches("error: ").to_string();
            return failure(&CliError::Parse(message), Vec::new());
        }
    };
    let mut warnings = Vec::new();
    let result = execute(&cli, env_tol, &mut warnings).and_then(|artifact| emit(&cli, &artifact));
    match result {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        },
        Err(e) => failure(&e, warnings),
    }
}

fn execute(cli: &Cli, env_tol: Option<&str>, warnings: &mut Vec<String>) -> Result<Artifact, CliError> {
    match &cli.command {
        Command::Mag(a) => {
            let (artifact, w) = commands::mag(a, cli.strict)?;
            warnings.extend(w);
            Ok(artifact)
        }
        Command::Beta(a) => commands::beta(a),
        Command::Expand(a) => commands::expand(a),
        Command::Convert(a) => commands::convert(a),
        Command::Gtable(a) => commands::gtable(a),
        Command::VerifyThm2(a) => commands::verify(a, env_tol),
    }
}

/// Renders the artifact; with `--output` it goes to the file and stdout stays empty.
fn emit(cli: &Cli, artifact: &Artifact) -> Result<String, CliError> {
    let text = match cli.format {
        Format::Json => to_json(&artifact.json),
        Format::Csv => to_csv(&artifact.table)?,
    };
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn failure(e: &CliError, warnings: Vec<String>) -> Outcome {
    let payload = ErrorPayload {
        error: e.name(),
        message: e.to_string(),
    };
    let mut stderr: String = warnings.iter().map(|w| format!("warning: {w}\n")).collect();
    stderr.push_str(&serde_json::to_string(&payload).expect("error payload serializes"));
    stderr.push('\n');
    Outcome {
        code: e.code(),
        stdout: String::new(),
        stderr,
    }
}

//! The `anthroquest` command line.
//!
//! Machine-readable output goes to `--out` or stdout, the one-line summary
//! to stderr. Exit status: 0 success, 1 I/O failure, 2 parse or usage
//! error (with line and column), 3 domain error.

mod args;
mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

pub use args::{Cli, Command};

use crate::config::ConfigError;
use crate::io::ParseError;
use crate::platform::PlatformError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}", line = .err.line, column = .err.column, message = .err.message)]
    Parse { path: String, err: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn status(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    pub(crate) fn parse(path: &Path, err: ParseError) -> Self {
        CliError::Parse { path: path.display().to_string(), err }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(p, m) => CliError::Io(format!("{}: {m}", p.display())),
            ConfigError::Parse(err) => CliError::Parse { path: "config".into(), err },
            ConfigError::Table(p, err) => CliError::parse(&p, err),
        }
    }
}

impl From<PlatformError> for CliError {
    fn from(e: PlatformError) -> Self {
        match e {
            PlatformError::Log(m) => CliError::Io(format!("log: {m}")),
            other => CliError::Domain(other.to_string()),
        }
    }
}

/// What a successful command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub status: u8,
    pub reports: Vec<PathBuf>,
    pub summary: String,
}

impl CommandOutcome {
    pub(crate) fn new(summary: impl Into<String>) -> Self {
        Self { status: 0, reports: Vec::new(), summary: summary.into() }
    }

    pub(crate) fn report(mut self, path: Option<&Path>) -> Self {
        self.reports.extend(path.map(Path::to_path_buf));
        self
    }
}

/// Runs one parsed command, writing primary output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    commands::run(cli, stdout)
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(outcome) => {
            let _ = stdout.flush();
            if !outcome.summary.is_empty() {
                eprintln!("{}", outcome.summary);
            }
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

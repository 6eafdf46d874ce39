use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Violation = 1,
    Validation = 2,
    NonConvergence = 3,
    Infeasible = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self { exit, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Exit::Validation, message)
    }
}

impl From<qrand_core::Error> for CliError {
    fn from(e: qrand_core::Error) -> Self {
        let exit = match e {
            qrand_core::Error::Infeasible(_) => Exit::Infeasible,
            _ => Exit::Validation,
        };
        Self::new(exit, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

#[derive(Serialize)]
struct Units {
    entropy: &'static str,
    rate: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    units: Units,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

/// Versioned JSON report around a command-specific body.
pub fn json_report<T: Serialize>(cfg: &RunConfig, body: &T) -> CliResult<String> {
    let env = Envelope {
        schema: 1,
        tool: "qrand",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command,
        seed: cfg.common.seed,
        units: Units { entropy: "bits", rate: "bits_per_use" },
        config: cfg,
        body,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::validation(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes the finished report to `--output` or stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Status lines go to stderr when the report itself goes to stdout.
pub fn note(cfg: &RunConfig, line: &str) {
    if cfg.common.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

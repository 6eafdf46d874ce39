use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::{CliError, Exit};

/// Environment variable that overrides every dimension cap.
pub const MAX_DIM_ENV: &str = "QRAND_MAX_DIM";

#[derive(Parser, Debug)]
#[command(name = "qrand", version, about = "Capacities, assisted protocols and binning simulations for finite quantum channels")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Channel spec, protocol spec or trace report, depending on the command.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long = "max-iters", global = true, default_value_t = 5000)]
    pub max_iters: usize,
    /// Random starts for the solvers (default 1 for I, 8 for χ).
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Report format (default json; csv for dw).
    #[arg(long, global = true, value_enum)]
    #[serde(skip)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Holevo information and channel mutual information of one channel.
    Capacity {
        /// Use the builtin two-basis channel F_d instead of --input.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Exact run of one protocol with Fano and information-flow audits.
    Protocol {
        /// Builtin protocol: figure4:d=N, coin-copy or f2-basis-forward.
        #[arg(long)]
        builtin: Option<String>,
        /// Shorthand for --builtin figure4:d=N.
        #[arg(long)]
        d: Option<usize>,
        /// Also estimate Pr(J≠K) from this many sampled runs.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Random-binning sweep over block lengths and binning seeds.
    Dw {
        /// Builtin source: maximally entangled input into F_d.
        #[arg(long)]
        d: Option<usize>,
        /// Block lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Number of binning seeds, counted from --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Monte Carlo trials in sampled mode.
        #[arg(long, default_value_t = 4000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Audits over the shipped suite and random protocols, or one input file.
    Audit {
        /// Seeded random protocols of each family added to the suite.
        #[arg(long, default_value_t = 50)]
        random: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Capacity { .. } => "capacity",
            Command::Protocol { .. } => "protocol",
            Command::Dw { .. } => "dw",
            Command::Audit { .. } => "audit",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Auto,
    Exact,
    Sampled,
}

impl From<Mode> for qrand_core::dw::DwMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => Self::Auto,
            Mode::Exact => Self::Exact,
            Mode::Sampled => Self::Sampled,
        }
    }
}

/// Everything that determines a report's content; embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(flatten)]
    pub common: Common,
    pub format: Format,
    pub max_dim_override: Option<usize>,
    pub args: Command,
}

impl RunConfig {
    pub fn new(cli: Cli, max_dim_env: Option<String>) -> Result<Self, CliError> {
        let max_dim_override = match max_dim_env {
            None => None,
            Some(s) => match s.trim().parse::<usize>() {
                Ok(d) if d > 0 => Some(d),
                _ => return Err(CliError::new(Exit::Validation, format!("{MAX_DIM_ENV}={s:?} is not a positive integer"))),
            },
        };
        let c = &cli.common;
        if !(c.tol.is_finite() && c.tol > 0.0) {
            return Err(CliError::new(Exit::Validation, "--tol must be positive"));
        }
        if c.max_iters == 0 || c.restarts == Some(0) {
            return Err(CliError::new(Exit::Validation, "--max-iters and --restarts must be positive"));
        }
        let default_format = if matches!(cli.command, Command::Dw { .. }) { Format::Csv } else { Format::Json };
        Ok(Self {
            command: cli.command.name(),
            format: cli.common.format.unwrap_or(default_format),
            common: cli.common,
            max_dim_override,
            args: cli.command,
        })
    }

    pub fn solver(&self) -> qrand_core::capacity::SolverOptions {
        let mut s = qrand_core::capacity::SolverOptions {
            tol: self.common.tol,
            max_iters: self.common.max_iters,
            restarts: self.common.restarts,
            seed: self.common.seed,
            ..Default::default()
        };
        if let Some(d) = self.max_dim_override {
            s.max_dim = d;
        }
        s
    }

    pub fn run_options(&self) -> qrand_core::protocol::RunOptions {
        let mut r = qrand_core::protocol::RunOptions::default();
        if let Some(d) = self.max_dim_override {
            r.max_dim = d;
        }
        r
    }
}

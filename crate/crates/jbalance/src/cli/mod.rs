//! Batch experiments over a JSON config, writing JSON and CSV artifacts.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 usage or config error,
//! 3 convergence or numerical failure, 4 quadrature health failure.

mod commands;
mod config;
mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{cmd_balance, cmd_flow, cmd_stability};
pub use config::{ExperimentConfig, StabilitySettings, Start, Tolerances};
pub use verify::{cmd_verify, CheckKind, CheckResult};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Code {
    Success = 0,
    Failure = 1,
    Usage = 2,
    Convergence = 3,
    Health = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    pub fn code(&self) -> Code {
        match self {
            CliError::Usage(_) => Code::Usage,
            CliError::Run(e) => match e {
                Error::Input(_) | Error::Polytope(_) | Error::Json(_) => Code::Usage,
                Error::Convergence(_) | Error::NotPositiveDefinite(_) | Error::Convexity(_) | Error::NonFinite(_) => {
                    Code::Convergence
                }
                Error::Io(_) | Error::Csv(_) => Code::Failure,
            },
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub code: Code,
    pub artifacts: Vec<PathBuf>,
    /// one line per result, for the terminal
    pub lines: Vec<String>,
}

pub fn outcome_code(r: &Result<Report, CliError>) -> Code {
    match r {
        Ok(rep) => rep.code,
        Err(e) => e.code(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "jbalance", version, about = "J-balanced metrics, the J-flow and J-stability on toric surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory (overrides the config)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// comma-separated levels, e.g. 2,4,8
    #[arg(long, global = true, value_delimiter = ',')]
    pub k_list: Option<Vec<u32>>,
    /// stopping tolerance of the balancing iteration
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Iterate to the balanced form at every level
    Balance,
    /// Run the balancing flow and the J-flow and compare them
    Flow,
    /// Exact stability weights and numerical criteria
    Stability,
    /// Run the invariant battery
    Verify,
}

impl Cli {
    /// Loads the config and applies the command-line overrides.
    pub fn resolve_config(&self) -> Result<ExperimentConfig, CliError> {
        let path = self.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = &self.k_list {
            cfg.k_list = k.clone();
        }
        if let Some(t) = self.tol {
            cfg.tolerances.balance = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        Command::Balance => cmd_balance(cfg),
        Command::Flow => cmd_flow(cfg),
        Command::Stability => cmd_stability(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Runs a parsed command line, printing results and errors; returns the exit code.
pub fn run(cli: &Cli) -> Code {
    let result = cli.resolve_config().and_then(|cfg| dispatch(cli.command, &cfg));
    match &result {
        Ok(rep) => {
            for l in &rep.lines {
                println!("{l}");
            }
            for a in &rep.artifacts {
                println!("wrote {}", a.display());
            }
        }
        Err(e) => eprintln!("jbalance: {e}"),
    }
    outcome_code(&result)
}

fn out_subdir(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir.join(name);
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    Ok(dir)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    std::fs::write(path, text + "\n").map_err(Error::from)?;
    Ok(path.to_path_buf())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path).map_err(Error::from)?))
}

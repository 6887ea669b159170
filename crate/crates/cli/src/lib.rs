//! Command-line front end of the spectral gap laboratory.
//!
//! `spectral-gap-lab <solve|quantization|sweep|verify-bounds|fit-exponent>`
//!
//! Exit codes: 0 success, 2 invalid config, 3 hypothesis violation,
//! 4 convergence failure, 5 bound violation.

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_fit_exponent, cmd_quantization, cmd_solve, cmd_sweep, cmd_verify_bounds, fit_rows,
    run_sweep, QuantizationReport, SweepRow, VerifySummary,
};
pub use config::{ConfigArgs, LengthGrid, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_BOUND_VIOLATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "spectral-gap-lab",
    version,
    about = "Neumann spectral gaps of 1D Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two lowest eigenvalues at one length, as JSON
    Solve(ConfigArgs),
    /// Analytic step ground state from the quantization condition, as JSON
    Quantization(ConfigArgs),
    /// Length sweep written as CSV, optionally with a log-log SVG
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV destination (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG destination
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Checks every bound on the sweep; exit 5 on any violation
    VerifyBounds(ConfigArgs),
    /// Power-law fit of the gap over the sweep, as JSON
    FitExponent {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the sweep CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a command prints and the code it exits with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.resolve()?;
            let res = cmd_solve(&cfg)?;
            let code = if res.converged { 0 } else { EXIT_CONVERGENCE };
            Ok(Outcome {
                stdout: to_json(&res),
                code,
            })
        }
        Command::Quantization(args) => {
            let cfg = args.resolve()?;
            Ok(Outcome::ok(to_json(&cmd_quantization(&cfg)?)))
        }
        Command::Sweep { config, out, svg } => {
            let cfg = config.resolve()?;
            let text = cmd_sweep(&cfg, svg.as_deref())?;
            match out {
                Some(path) => {
                    std::fs::write(path, text)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
        Command::VerifyBounds(args) => {
            let cfg = args.resolve()?;
            let summary = cmd_verify_bounds(&cfg)?;
            let code = if summary.violations.is_empty() {
                0
            } else {
                EXIT_BOUND_VIOLATION
            };
            Ok(Outcome {
                stdout: to_json(&summary),
                code,
            })
        }
        Command::FitExponent { config, out } => {
            let cfg = config.resolve()?;
            let rows = run_sweep(&cfg)?;
            if let Some(path) = out {
                std::fs::write(path, csv::render(rows.iter().map(|r| &r.record)))?;
            }
            Ok(Outcome::ok(to_json(&fit_rows(&rows)?)))
        }
    }
}

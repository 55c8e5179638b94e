//! `heisenpaley` command line.
//!
//! ```text
//! heisenpaley <transform|check|atom|paley> --config run.json [--out DIR]
//!             [--probe] [--oracle] [--seed N] [--tol X]
//! ```
//!
//! Exit codes: 0 success, 1 a numerical check failed, 2 bad configuration.

// `!(x > 0.0)` also rejects NaN, which is the point of writing it that way.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use heisenpaley::Error;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "heisenpaley",
    version,
    about = "Heisenberg-group Fourier analysis and Paley-type inequality sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Allow σ outside the admissible window; results are labelled as a non-theorem probe.
    #[arg(long, global = true)]
    pub probe: bool,
    /// Compare a Gaussian transform with its closed form.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Seed for the atom null-space direction.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override the tolerance of the command's numerical check.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate R_f(λ, m, α) and write table.json.
    Transform,
    /// Plancherel ratio and inversion at the origin; writes check.json.
    Check,
    /// Build and validate a (p, ∞, s)-atom; writes atom.json and atom_report.json.
    Atom,
    /// Sweep the weighted spectral integral over dilated atoms; writes paley.csv, paley.json and plot data.
    Paley,
}

/// Why a command did not succeed.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Exit code 2.
    Config(String),
    /// Exit code 1.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::DimensionMismatch { .. }
            | Error::SigmaOutOfRange { .. }
            | Error::ZeroLambda
            | Error::Unsupported(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Parse `args` (program name first), run the command, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Config(msg) => eprintln!("configuration error: {msg}"),
                Failure::Numerical(msg) => eprintln!("check failed: {msg}"),
            }
            f.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if cli.probe {
        cfg.probe = true;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol >= 0.0) {
            return Err(Failure::Config(format!("--tol must be nonnegative, got {tol}")));
        }
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", out.display())))?;
    let ctx = commands::Context {
        cfg: &cfg,
        out: &out,
        oracle: cli.oracle,
        tol: cli.tol,
    };
    match cli.command {
        Command::Transform => commands::transform(&ctx),
        Command::Check => commands::check(&ctx),
        Command::Atom => commands::atom(&ctx),
        Command::Paley => commands::paley(&ctx),
    }
}

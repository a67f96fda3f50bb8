//! Command-line driver: builds family members, runs the nonexistence scans
//! and the oracle suites, and writes CSV, JSON and SVG artifacts.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

use config::{Command, ConfigLayer, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, err: impl Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Verification(_) => exit::VERIFICATION,
            CliError::Calibration(_) => exit::CALIBRATION,
            CliError::Io { .. } => exit::IO,
        }
    }
}

pub mod exit {
    pub const PASS: u8 = 0;
    pub const IO: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const VERIFICATION: u8 = 3;
    pub const CALIBRATION: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "bihermitian", version, about = "Build and verify cohomogeneity-one bi-Hermitian Gray metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build one family member, synthesize its profile and check it.
    Family(Flags),
    /// Run the trivial-ruled-surface nonexistence scans.
    Scan(Flags),
    /// Run calibration, the oracle agreement suite and the cyclic-Ricci check.
    Verify(Flags),
}

#[derive(Debug, Args)]
pub struct Flags {
    /// Genus of the base curve.
    #[arg(long)]
    pub genus: Option<u32>,
    /// Degree of the circle bundle.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,
    /// Family parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// CP² family sign (1 or -1).
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<i8>,
    /// Use the CP² families.
    #[arg(long)]
    pub cp2: bool,
    /// Number of grid intervals.
    #[arg(long)]
    pub n: Option<usize>,
    /// Verification tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    pub formats: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relative perturbation of G applied in the oracle (negative control).
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Points per axis of the compatibility-residual sweep.
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Cyclic-Ricci samples on the chosen family.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl Flags {
    fn layer(&self) -> Result<ConfigLayer, CliError> {
        Ok(ConfigLayer {
            genus: self.genus,
            k: self.k,
            x: self.x,
            eps: self.eps,
            cp2: self.cp2.then_some(true),
            n: self.n,
            tol: self.tol,
            out: self.out.clone(),
            formats: self.formats.as_deref().map(str::parse).transpose()?,
            seed: self.seed,
            perturb: self.perturb,
            sweep: self.sweep,
            samples: self.samples,
        })
    }
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let (command, flags) = match &cli.command {
        Sub::Family(f) => (Command::Family, f),
        Sub::Scan(f) => (Command::Scan, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let base = match &flags.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    RunConfig::resolve(command, base.overlay(flags.layer()?))
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = resolve(cli).and_then(|cfg| match cfg.command {
        Command::Family => commands::cmd_family(&cfg),
        Command::Scan => commands::cmd_scan(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
    });
    match outcome {
        Ok(true) => exit::PASS,
        Ok(false) => {
            eprintln!("verification failed; see the report for residuals");
            exit::VERIFICATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

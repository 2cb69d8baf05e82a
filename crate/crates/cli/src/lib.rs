//! Command-line front end: bound tables, `μ₃` sweeps, cell-problem solves,
//! seeded verification batches and BMO reports, each reproducible from the
//! manifest written next to its output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use conducta_core::bmo_analysis::BmoError;
use conducta_core::{BoundsError, GridError, PhaseError, SolverError};

pub mod commands;
pub mod format;
pub mod manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        })*
    };
}

validation_from!(PhaseError, BoundsError, GridError, BmoError, std::io::Error, csv::Error);

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// How `S` is chosen: a fixed value or the minimizer of the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SPolicy {
    Value(f64),
    Optimize,
}

impl std::fmt::Display for SPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SPolicy::Value(s) => f.write_str(&format::num(*s)),
            SPolicy::Optimize => f.write_str("opt"),
        }
    }
}

fn parse_s_policy(text: &str) -> Result<SPolicy, String> {
    if text.eq_ignore_ascii_case("opt") {
        return Ok(SPolicy::Optimize);
    }
    match text.parse::<f64>() {
        Ok(s) if s.is_finite() && s > 0.0 => Ok(SPolicy::Value(s)),
        Ok(s) => Err(format!("S must be positive and finite, got {s}")),
        Err(_) => Err(format!("expected a positive number or `opt`, got `{text}`")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "conducta", version, about = "Effective-conductivity bounds for multiphase composites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of closed-form upper bounds for a phase configuration.
    Bounds(BoundsArgs),
    /// Bounds along a log-spaced sweep of the third-phase fraction.
    Sweep(SweepArgs),
    /// Solve the cell problem on a grid file and check the bounds.
    Solve(SolveArgs),
    /// Generate, solve and bound-check a seeded corpus of random grids.
    Verify(VerifyArgs),
    /// BMO analysis of the constructive potential on a grid or corpus.
    Bmo(BmoArgs),
    /// Write a laminate, checkerboard or random grid file.
    Generate(GenerateArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BoundOptions {
    /// Dimensional constant C of the E term.
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Use the full E term instead of the simplified one.
    #[arg(long)]
    pub full_e: bool,
    /// Grid points probed before refining the optimal S.
    #[arg(long, default_value_t = 64)]
    pub search_points: usize,
}

impl BoundOptions {
    pub fn config(&self) -> conducta_core::BoundConfig {
        conducta_core::BoundConfig {
            c: self.c,
            use_simplified_e: !self.full_e,
            s_search_points: self.search_points,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverOptions {
    /// Relative residual at which the conjugate gradient stops.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

impl SolverOptions {
    pub fn config(&self) -> conducta_core::SolverConfig {
        conducta_core::SolverConfig {
            relative_tolerance: self.tol,
            max_iterations: self.max_iter,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Number of grids.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Voxels per axis (power of two).
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Phases per grid.
    #[arg(long, default_value_t = 2)]
    pub phases: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma_max: f64,
    /// Smooth the random field with this correlation length instead of
    /// drawing voxels independently.
    #[arg(long)]
    pub correlation_length: Option<f64>,
    /// Base seed; grid i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override the dimension given in the config.
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub bound: BoundOptions,
    /// S for the theorem-1 row, or `opt` to report only the optimized row.
    #[arg(long = "S", default_value = "opt", value_parser = parse_s_policy, allow_hyphen_values = true)]
    pub s: SPolicy,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Three-phase config; its third fraction is replaced along the sweep.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub bound: BoundOptions,
    #[arg(long, default_value_t = 1e-6)]
    pub mu3_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu3_max: f64,
    /// Number of log-spaced fractions between the two ends.
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Explicit comma-separated fractions, overriding the log spacing.
    #[arg(long, value_delimiter = ',')]
    pub mu3: Option<Vec<f64>>,
    /// Omit the closing μ₃ = 0 row.
    #[arg(long)]
    pub no_zero: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[command(flatten)]
    pub bound: BoundOptions,
    #[arg(long = "S", default_value = "opt", value_parser = parse_s_policy, allow_hyphen_values = true)]
    pub s: SPolicy,
    #[command(flatten)]
    pub solver: SolverOptions,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Also check the optimized theorem-1 bound with this C.
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[command(flatten)]
    pub solver: SolverOptions,
    #[arg(long, env = "CONDUCTA_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BmoArgs {
    /// Analyze one grid file instead of a generated corpus.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long = "S", default_value = "opt", value_parser = parse_s_policy, allow_hyphen_values = true)]
    pub s: SPolicy,
    /// C used only to pick the optimal S.
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Relative margin added to the largest ratio for the recommended C.
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    /// Levels sampled for the John–Nirenberg fit.
    #[arg(long, default_value_t = 40)]
    pub levels: usize,
    #[arg(long, env = "CONDUCTA_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Laminate,
    Checkerboard,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GridKind,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Layer normal for laminates.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub correlation_length: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            } else {
                let _ = write!(stderr, "{e}");
                EXIT_VALIDATION
            };
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match commands::dispatch(cli.command, &argv, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

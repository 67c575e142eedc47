//! `ncpath`: configure, run, and export single solves, full regularization
//! paths, and Monte Carlo experiments.
//!
//! Exit codes: 0 on success, 1 when the solver missed its convergence budget
//! (or too many replications failed), 2 on configuration errors.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod problem;

use config::RunConfig;

/// CLI-level error with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unreadable inputs (exit 2).
    Config(String),
    /// Artifact I/O failure (exit 2).
    Io(String),
    /// Solver-side failure (exit 1).
    Solver(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ncpath",
    about = "Approximate regularization path following for sparse nonconvex M-estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key-value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads for replications.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one proximal-gradient solve at a fixed λ.
    Solve(Common),
    /// Run the full regularization path.
    Path(Common),
    /// Run a Monte Carlo experiment over replications.
    Experiment(Common),
    /// Dump a generated synthetic problem to CSV.
    Gen(Common),
    /// Run penalty-regularity and gradient self-tests on the configured
    /// problem.
    Check(Common),
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", common.config.display()))
    })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
        if let Some(generator) = &mut cfg.generator {
            generator.seed = seed;
        }
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(reps) = common.reps {
        if reps == 0 {
            return Err(CliError::Config("reps must be at least 1".into()));
        }
        cfg.reps = reps;
    }
    if let Some(parallel) = common.parallel {
        cfg.parallel = parallel.max(1);
    }
    Ok(cfg)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(c) => commands::cmd_solve(&load_config(c)?),
        Command::Path(c) => commands::cmd_path(&load_config(c)?),
        Command::Experiment(c) => commands::cmd_experiment(&load_config(c)?),
        Command::Gen(c) => commands::cmd_gen(&load_config(c)?),
        Command::Check(c) => commands::cmd_check(&load_config(c)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

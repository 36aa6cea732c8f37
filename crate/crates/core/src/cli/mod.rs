//! The `ampc` command line: budget calibration, training experiments,
//! privacy audits, sharing demos, protocol programs and data generation.
//!
//! Exit codes: 0 success, 2 infeasible budget, 64 usage or input error,
//! 70 internal protocol failure.

mod commands;
mod config;
mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::error::AmpcError;

pub use commands::{run_experiment, ExperimentOutcome};
pub use config::ExperimentConfig;
pub use format::{round_json, sig9};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

/// Environment variable that overrides any configured seed.
pub const SEED_ENV: &str = "AMPC_SEED";

#[derive(Debug, Parser)]
#[command(name = "ampc", version, about = "Analog secret sharing MPC with local differential privacy")]
pub struct Cli {
    /// Run every data-parallel stage on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate the truncated Gaussian noise for an (ε, δ) budget.
    Calibrate(CalibrateArgs),
    /// Run collaborative training and the centralized baseline.
    Train(TrainArgs),
    /// Monte-Carlo check of the violation probability.
    Audit(AuditArgs),
    /// Share, reconstruct and multiply scalars, printing every step.
    Demo(DemoArgs),
    /// Evaluate an arithmetic DAG (JSON) under the protocol.
    RunProgram(ProgramArgs),
    /// Write a synthetic dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("sens").required(true).args(["sensitivity", "record_bound"])))]
pub struct CalibrateArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    /// Truncation half-width t.
    #[arg(long)]
    pub trunc_t: f64,
    /// Sensitivity Δ.
    #[arg(long)]
    pub sensitivity: Option<f64>,
    /// Record norm bound; Δ = 2·bound.
    #[arg(long)]
    pub record_bound: Option<f64>,
    /// Collusion threshold T.
    #[arg(long, default_value_t = 1)]
    pub t_colluders: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Write the message transcript (JSON lines) here.
    #[arg(long)]
    pub dump_transcript: Option<PathBuf>,
    /// Record real elapsed time in the wall_ms column (otherwise 0, which
    /// keeps outputs byte-identical across runs).
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["sigma", "from_budget"])))]
pub struct AuditArgs {
    /// Mechanism σ; needs --epsilon, --delta, --trunc-t and --sensitivity.
    #[arg(long, requires_all = ["epsilon", "delta", "trunc_t", "sensitivity"])]
    pub sigma: Option<f64>,
    /// Budget JSON written by `calibrate` or `train`.
    #[arg(long)]
    pub from_budget: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trunc_t: Option<f64>,
    #[arg(long)]
    pub sensitivity: Option<f64>,
    /// Scales the σ under test.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_scale: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0, env = SEED_ENV)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub secret: f64,
    /// Number of clients N.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub t_colluders: usize,
    /// Per-coefficient noise σ_s.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_s: f64,
    #[arg(long, default_value_t = 100.0)]
    pub trunc_t: f64,
    /// Also multiply these two scalars with a Beaver triple.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub multiply: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0, env = SEED_ENV)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Program JSON: nodes, inputs, outputs and optional values.
    #[arg(long)]
    pub program: PathBuf,
    /// Input values as JSON {name: [[row], ...]}; overrides embedded ones.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n_clients: usize,
    #[arg(long, default_value_t = 1)]
    pub t_colluders: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_s: f64,
    #[arg(long, default_value_t = 100.0)]
    pub trunc_t: f64,
    #[arg(long, default_value_t = 0, env = SEED_ENV)]
    pub seed: u64,
    #[arg(long)]
    pub dump_transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DataKind {
    Separable,
    Linear,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    #[arg(long, default_value_t = 400)]
    pub rows: usize,
    #[arg(long, default_value_t = 5)]
    pub features: usize,
    #[arg(long, default_value_t = 0, env = SEED_ENV)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &AmpcError) -> i32 {
    match e {
        AmpcError::InfeasibleBudget(_) => EXIT_INFEASIBLE,
        AmpcError::InvalidArgument(_)
        | AmpcError::Config(_)
        | AmpcError::Dataset(_)
        | AmpcError::Io(_)
        | AmpcError::Json(_)
        | AmpcError::Csv(_) => EXIT_USAGE,
        AmpcError::SingularMatrix(_)
        | AmpcError::SamplingFailure { .. }
        | AmpcError::TruncationInfeasible { .. }
        | AmpcError::InsufficientShares { .. }
        | AmpcError::ProtocolViolation(_)
        | AmpcError::NumericOverflow(_)
        | AmpcError::IncompleteAggregation(_) => EXIT_INTERNAL,
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match commands::dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

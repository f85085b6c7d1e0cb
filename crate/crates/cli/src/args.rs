use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "scenario-cert",
    version,
    about = "Certified risk bounds for scenario designs"
)]
pub struct Cli {
    /// Pretty-print JSON output with this indentation width.
    #[arg(long, global = true, value_name = "WIDTH")]
    pub json_indent: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the risk-bound functions.
    Epsilon(EpsilonArgs),
    /// Certify the decision computed from a scenario file.
    Certify(CertifyArgs),
    /// Certified envelope for the cost distribution.
    Cdf(CdfArgs),
    /// Run a bundled case study end to end.
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Re-check a saved certificate by Monte Carlo.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Upper,
    Pair,
    Both,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("query").required(true).args(["k", "table"])))]
pub struct EpsilonArgs {
    /// Sample size N.
    #[arg(long)]
    pub n: usize,
    /// Confidence parameter in (0, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Single complexity value.
    #[arg(long)]
    pub k: Option<usize>,
    /// Every complexity from 0 to N.
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// `pole-placement` or `input-design`.
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Damping sector `max_real:min_damping` (pole placement).
    #[arg(long, allow_hyphen_values = true, default_value = "-0.7:0.5")]
    pub sector: String,
    /// Relaxation weight (input design).
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Post-design relative cost level (input design).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Greedily shrink the augmented support list.
    #[arg(long)]
    pub prune: bool,
    /// Assert that post-design appropriateness implies baseline appropriateness.
    #[arg(long)]
    pub nested: bool,
    /// Assert that the support list is almost surely unique.
    #[arg(long)]
    pub nondegenerate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// `lo:hi:count` or a JSON file holding an array of levels.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Assert non-degeneracy and emit both sides of the envelope.
    #[arg(long)]
    pub nondegenerate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// Inverted pendulum with uncertain mass, length and friction.
    PolePlacement(PolePlacementArgs),
    /// Final-state control of an uncertain two-state system.
    InputDesign(InputDesignArgs),
}

#[derive(Debug, Args)]
pub struct PolePlacementArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, allow_hyphen_values = true, default_value = "-0.7:0.5")]
    pub sector: String,
    /// Comma-separated alternative `max_real` values.
    #[arg(long, allow_hyphen_values = true)]
    pub sector_sweep: Option<String>,
    /// Fresh scenarios for the Monte Carlo check; 0 disables it.
    #[arg(long, default_value_t = 100_000)]
    pub mc: usize,
    #[arg(long)]
    pub nondegenerate: bool,
    #[arg(long)]
    pub prune: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputDesignArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "-0.15:0:100")]
    pub grid: String,
    #[arg(long, default_value_t = 100_000)]
    pub mc: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Certificate written by `certify` or `example`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub mc: usize,
    /// Seed for the fresh scenarios; defaults to the one stored in the report.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

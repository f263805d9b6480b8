use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mim_core::DEFAULT_SEED;

const SEED_HELP: &str = "RNG seed; defaults to 20170001";

/// Message importance measure toolkit.
///
/// Stochastic commands default to seed 20170001 and echo the seed they used.
#[derive(Debug, Parser)]
#[command(name = "mim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate L(p, ϖ) for a distribution
    Compute(ComputeArgs),
    /// Select the importance coefficient for a binary distribution
    Select(SelectArgs),
    /// Run the batch-wise minority-event tracker
    Simulate(SimulateArgs),
    /// Run the invariant suites
    Verify(VerifyArgs),
    /// Write the figure data tables as CSV
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("coefficient").required(true).args(["omega", "focus"])))]
pub struct ComputeArgs {
    /// Distribution as inline JSON or a path to a JSON file
    #[arg(long)]
    pub dist: String,
    /// Importance coefficient ϖ
    #[arg(long)]
    pub omega: Option<f64>,
    /// Focus on element j, i.e. ϖ = 1/p_j
    #[arg(long)]
    pub focus: Option<usize>,
    /// Also print every summand p_i e^{ϖ(1-p_i)}
    #[arg(long)]
    pub terms: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["p", "interval"])))]
pub struct SelectArgs {
    /// Focused probability of the binary distribution (p, 1-p)
    #[arg(long)]
    pub p: Option<f64>,
    /// Prior interval p_lo p_hi within (0, 1/2)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
    /// Residual tolerance on |g(p, ϖ*)|
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model as inline JSON or a path: {"probs": [...], "M": int, "epsilon": real}
    #[arg(long, conflicts_with_all = ["p1", "dist"])]
    pub model: Option<String>,
    /// Category distribution (inline JSON or path); the first entry is p_1
    #[arg(long, conflicts_with = "p1")]
    pub dist: Option<String>,
    /// Binary model (p_1, 1 - p_1)
    #[arg(long)]
    pub p1: Option<f64>,
    /// Sequence length M
    #[arg(long = "M", id = "M")]
    pub sequence_len: Option<u64>,
    /// Deviation threshold ε
    #[arg(long)]
    pub eps: Option<f64>,
    /// Batch sizes: `1000,500,...` or `<size>x<count>`
    #[arg(long)]
    pub batches: String,
    #[arg(long, default_value_t = DEFAULT_SEED, help = SEED_HELP)]
    pub seed: u64,
    /// Tracker CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path; stdout when --out is given, stderr otherwise
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// ε used for the Chebyshev bound on L̂
    #[arg(long, default_value_t = 1.0)]
    pub chebyshev_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Properties,
    Select,
    Stream,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Properties => "properties",
            SuiteName::Select => "select",
            SuiteName::Stream => "stream",
            SuiteName::All => "all",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteName,
    /// Random distributions for the property suite
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Solver grid lo:hi:step
    #[arg(long, default_value = "0.02:0.45:0.01")]
    pub grid: String,
    /// Grid for the Taylor/exact ratio
    #[arg(long, default_value = "0.05:0.45:0.01")]
    pub taylor_grid: String,
    /// Monte Carlo replicas for the stream suite
    #[arg(long, default_value_t = 100_000)]
    pub replicas: usize,
    /// Seeded simulate runs for the sandwich check
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED, help = SEED_HELP)]
    pub seed: u64,
    /// Also write the report as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig1,
    Fig2,
    Fig3,
    All,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub which: FigureName,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub binomial_n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub binomial_theta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub poisson_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    pub geometric_q: f64,
    /// Support size K of the truncated Poisson and geometric tables
    #[arg(long, default_value_t = 11)]
    pub support: usize,
    #[arg(long, default_value_t = 11)]
    pub uniform_n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub p_step: f64,
    #[arg(long, default_value_t = 0.05)]
    pub omega_step: f64,
    #[arg(long, default_value_t = 25.0)]
    pub omega_max: f64,
}

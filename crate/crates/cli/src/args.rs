use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "cetradeoff",
    version,
    about = "Classical capacities of quantum channels with limited entanglement assistance"
)]
pub struct Cli {
    /// Base seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for reports, curves and plots.
    #[arg(long, global = true, default_value = "cetradeoff-out")]
    pub out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Capacity of one channel.
    Capacity(CapacityArgs),
    /// Capacity against entanglement budget on a grid: CSV, SVG and slope analysis.
    Sweep(SweepArgs),
    /// Randomized checks of the structural lemmas.
    Verify(VerifyArgs),
    /// Superadditivity demonstration on a flagged channel.
    DemoMainTheorem(DemoArgs),
    /// Summarizes a channel spec and re-emits it.
    Describe(DescribeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Blahut-Arimoto (classical channels only).
    Classical,
    /// One-shot capacity without assistance.
    C1,
    /// One-shot capacity with entanglement budget `--P`.
    C1p,
    /// `n` uses jointly, per use; `--P` optional.
    Nshot,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// JSON channel spec.
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value = "c1")]
    pub mode: Mode,
    /// Entanglement budget in ebits per use.
    #[arg(long = "P", alias = "p")]
    pub budget: Option<f64>,
    /// Number of channel uses for `nshot`.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub pmin: f64,
    /// Defaults to `log₂ d_in`.
    #[arg(long)]
    pub pmax: Option<f64>,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or one of lemma1, lemma2, lemma3, tensor, covariant, twirl.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Trials per suite (ensembles for lemma1, states per dimension for twirl, instances
    /// otherwise); defaults per suite.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.25)]
    pub lambda: f64,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct DescribeArgs {
    pub spec: PathBuf,
    /// Re-emit as explicit Kraus operators instead of the normalized spec.
    #[arg(long)]
    pub literal: bool,
}

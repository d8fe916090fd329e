use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "weavefuse", version, about = "Bounds, phase retrievability and erasure checks for weaving fusion frames")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Tolerance for frame-bound and rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Visit every subset or a seeded sample of them.
    #[arg(long, visible_alias = "mode", global = true, value_enum, default_value_t = SigmaModeArg::Exact)]
    pub sigma_mode: SigmaModeArg,

    /// Sampled subsets (sample mode) or sampled vector pairs (alpha).
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,

    /// Monte Carlo trials for erasure commands.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SigmaModeArg {
    Exact,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Universal lower and upper frame bounds over woven families.
    Bounds { spec: PathBuf },
    #[command(subcommand)]
    Check(CheckCommand),
    /// Sampled estimate of the robustness constant at one subset.
    Alpha {
        spec: PathBuf,
        /// 1-based indices drawn from the first family, e.g. `1,2`.
        #[arg(long, default_value = "")]
        sigma: String,
    },
    /// Maps every subspace through a unitary and compares verdicts.
    Transport {
        spec: PathBuf,
        /// A JSON matrix file (rows of numbers or `[re, im]` pairs) or
        /// `random:<seed>`.
        #[arg(long)]
        unitary: String,
    },
    #[command(subcommand)]
    Simulate(SimulateCommand),
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    Weaving { spec: PathBuf },
    Phase { spec: PathBuf },
    Complement { spec: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    Erasure(ErasureArgs),
}

#[derive(Debug, Args)]
pub struct ErasureArgs {
    pub spec: PathBuf,
    #[arg(long, default_value = "")]
    pub sigma: String,
    #[arg(long, default_value_t = 0.5)]
    pub keep_prob: f64,
    /// `halving` (2/m), `corrected` or `scale:<x>`.
    #[arg(long, default_value = "corrected")]
    pub estimator: String,
    /// JSON array of coordinates; defaults to a seeded random unit vector.
    #[arg(long)]
    pub vector: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    Erasure(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8])]
    pub dims: Vec<usize>,
    /// Each `m` is a factor times `n`.
    #[arg(long, value_delimiter = ',', default_values_t = vec![8, 32, 128])]
    pub m_factors: Vec<usize>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

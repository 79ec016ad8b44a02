use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "diffinv", version, about = "Image differential invariants from F/G operator chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog invariants, optionally restricted to one independent set.
    Gen(GenArgs),
    /// Exact invariance, relation, set-size and expansion checks.
    Check(CheckArgs),
    /// Feature vector at the centre of one patch.
    Eval(EvalArgs),
    /// Per-pixel invariant maps written as PGMs.
    Featmap(FeatmapArgs),
    /// Build a synthetic patch database.
    Synthdb(SynthdbArgs),
    /// Nearest-neighbour classification on a database.
    Classify(ClassifyArgs),
    /// Pair verification (average precision) on a database.
    Verify(VerifyArgs),
    /// Consolidated discrepancy report.
    Report,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Independent set as KIND,ORDER,DEGREE, e.g. IR,4,3.
    #[arg(long)]
    pub set: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub invariance: bool,
    #[arg(long)]
    pub relations: bool,
    #[arg(long)]
    pub sets: bool,
    #[arg(long)]
    pub expansions: bool,
    /// Random maps per invariant and group.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Fail on any non-verifying row instead of the count thresholds.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long, default_value = "IR,4,3")]
    pub set: String,
    /// Comma-separated scales.
    #[arg(long, value_delimiter = ',', default_value = "12")]
    pub sigma: Vec<f64>,
    /// Kernel width in pixels (odd); defaults to the smallest odd >= 8 sigma + 1.
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub patch: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Reflect at patch borders instead of requiring the kernel to fit.
    #[arg(long)]
    pub reflect: bool,
}

#[derive(Debug, Args)]
pub struct FeatmapArgs {
    /// Image to map; defaults to the seeded base texture.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct SynthdbArgs {
    /// One of the eight standard transform combinations (1..=8).
    #[arg(long, conflicts_with = "transforms")]
    pub preset: Option<usize>,
    /// Explicit transform list, e.g. rotation,intensity-affine.
    #[arg(long, value_delimiter = ',')]
    pub transforms: Vec<String>,
    #[arg(long, default_value_t = 60)]
    pub instances: usize,
    /// Grid cells per side used as classes.
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    /// Rotate by quarter turns only.
    #[arg(long)]
    pub quarter_turns: bool,
    /// Fail instead of mirroring when a patch leaves the base image.
    #[arg(long)]
    pub reject_boundary: bool,
    /// Base image; defaults to the seeded smooth-noise texture.
    #[arg(long)]
    pub base: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Also report the mean relative error of every invariant.
    #[arg(long)]
    pub mre: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Negative pairs drawn per positive pair.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
}

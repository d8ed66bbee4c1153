use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sepred", version, about = "Super-enhancer classification with dense and Conv1D networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset CSV and its manifest JSON.
    Gen(GenArgs),
    /// Stratified k-fold cross-validation of one model on one feature set.
    Cv(CommonArgs),
    /// Cross-validate every requested variant × feature-set pair.
    Ablate(CommonArgs),
    /// Compare backprop gradients with central finite differences.
    Gradcheck(GradcheckArgs),
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML key-value file with run settings.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Dataset CSV (feature columns followed by `label`).
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Feature manifest JSON; the built-in 45-feature manifest when omitted.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// dpnn or conv1d; ablate accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<String>,
    /// all, genomic or epigenomic; ablate accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub category: Vec<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Also train on all rows and write model_<variant>_<category>.json.
    #[arg(long)]
    pub save_model: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    /// Distance between class means on every signal feature.
    #[arg(long)]
    pub separation: Option<f64>,
    /// genomic, epigenomic or both.
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long)]
    pub noise_stddev: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Perturb every analytic gradient to exercise the failure path.
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
}

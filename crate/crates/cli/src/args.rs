use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use simspace_core::distance::DistanceMetric;
use simspace_core::mds::MdsMode;
use simspace_core::pixel::Aggregator;
use simspace_core::regression::RegressorKind;

#[derive(Debug, Parser)]
#[command(
    name = "simspace",
    version,
    about = "Build psychological similarity spaces and map images into them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a configuration to a dissimilarity matrix with SMACOF.
    Mds(MdsArgs),
    /// Score an existing configuration against a dissimilarity matrix.
    Stress(StressArgs),
    /// Correlate representation distances with dissimilarities.
    Correlate(CorrelateArgs),
    /// Block-aggregated pixel features for a directory of images.
    PixelBaseline(PixelArgs),
    /// Write augmented copies of every image plus a manifest.
    Augment(AugmentArgs),
    /// Grouped cross-validation of a regressor from features onto a space.
    Regress(RegressArgs),
    /// Run a whole experiment from a configuration file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    #[arg(long)]
    pub dissimilarities: PathBuf,
    #[arg(long, default_value = "nonmetric")]
    pub mode: MdsMode,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long, default_value_t = 256)]
    pub restarts: usize,
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    /// Stop a restart once stress improves by less than this.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also fit 1..=scree-max dimensions and write their stress here.
    #[arg(long)]
    pub scree: Option<PathBuf>,
    #[arg(long = "scree-max", default_value_t = 10)]
    pub scree_max: usize,
}

#[derive(Debug, Args)]
pub struct StressArgs {
    #[arg(long)]
    pub dissimilarities: PathBuf,
    #[arg(long)]
    pub configuration: PathBuf,
    /// Both modes when omitted.
    #[arg(long)]
    pub mode: Option<MdsMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingChoice {
    None,
    Nnls,
    Both,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("representation").required(true).args(["features", "configuration"])))]
pub struct CorrelateArgs {
    #[arg(long)]
    pub dissimilarities: PathBuf,
    /// Feature matrix CSV whose sample ids are the stimulus labels.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Configuration CSV.
    #[arg(long)]
    pub configuration: Option<PathBuf>,
    /// Comma-separated; all three when omitted.
    #[arg(long, value_delimiter = ',')]
    pub metric: Vec<DistanceMetric>,
    #[arg(long, value_enum, default_value = "both")]
    pub weighting: WeightingChoice,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PixelArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// Block size; with several comma-separated sizes one file is written
    /// per size, named `<out stem>_k<K>.<ext>`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub block: Vec<usize>,
    #[arg(long, default_value = "mean")]
    pub aggregator: Aggregator,
    /// Augmentation manifest supplying group ids.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// Augmented copies per image.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Configuration CSV; normalized before use.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value = "linear")]
    pub regressor: RegressorKind,
    /// Comma-separated β values for lasso.
    #[arg(long = "beta-grid", value_delimiter = ',')]
    pub beta_grid: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Permute the stimulus-to-point assignment with this seed.
    #[arg(long = "shuffle-targets")]
    pub shuffle_targets: Option<u64>,
    /// Name written to the report; the features file stem by default.
    #[arg(long = "feature-space")]
    pub feature_space: Option<String>,
    /// Name written to the report; the targets file stem by default.
    #[arg(long = "target-space")]
    pub target_space: Option<String>,
    /// Standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Every evaluated β with training scores.
    #[arg(long)]
    pub detailed: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir` from the file.
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
}

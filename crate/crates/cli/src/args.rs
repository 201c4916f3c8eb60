use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "datadim", version, about = "Intrinsic dimension, label sharpness and scaling-law fits")]
pub struct Cli {
    /// Emit compact JSON on stdout (no timestamp).
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the intrinsic dimension of a point cloud.
    Id(IdArgs),
    /// Estimate the label sharpness of a labeled point cloud.
    Sharpness(SharpnessArgs),
    /// Fit a scaling law to records.
    Fit(FitArgs),
    /// Likelihood ratio of the model with label sharpness against the one without.
    Lratio(LratioArgs),
    /// Pearson correlation of two value lists.
    Correlate(CorrelateArgs),
    /// Order tasks by label sharpness.
    RankTasks(RankTasksArgs),
    /// Certified robustness radius lower bound.
    RobustBound(RobustBoundArgs),
    /// Check that a representation's dimension stays below the data's.
    CompareDims(CompareDimsArgs),
    /// Sample a point cloud from a known manifold.
    Synth(SynthArgs),
    /// Generate scaling records from the law with label sharpness.
    SynthRecords(SynthRecordsArgs),
    /// Exact k nearest neighbors.
    Knn(KnnArgs),
    /// Convert PGM/PPM images to an IPMX matrix, one image per row.
    Convert(ConvertArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorArg {
    Mle,
    Twonn,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    LinearFit,
    ClosedForm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    A,
    B,
    Repr,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Hypercube,
    Hypersphere,
    SineLift,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingArg {
    AxisAligned,
    RandomOrthogonal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DtypeArg {
    F32,
    F64,
}

#[derive(Args, Debug)]
pub struct IdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "mle")]
    pub estimator: EstimatorArg,
    /// Neighbors used by MLE.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Fraction of largest neighbor ratios dropped by TwoNN.
    #[arg(long, default_value_t = 0.1)]
    pub discard: f64,
    #[arg(long, value_enum, default_value = "linear-fit")]
    pub variant: VariantArg,
    /// Bootstrap resamples; more than 1 adds a mean and 95% interval.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the estimates as CSV.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV with header `index,label`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Rows sampled per run.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Runs over random class pairs; defaults to 25 for more than two classes, else 1.
    #[arg(long)]
    pub runs: Option<usize>,
    /// One balanced sample over all classes instead of class pairs.
    #[arg(long)]
    pub multiclass: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the per-run values as CSV.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, value_enum, default_value = "a")]
    pub model: ModelArg,
    /// Fit each value of this column separately.
    #[arg(long)]
    pub group_by_column: Option<String>,
    /// Write the residuals as CSV.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LratioArgs {
    #[arg(long)]
    pub records: PathBuf,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub xs: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub ys: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct RankTasksArgs {
    /// `name=k_f`, or a bare `k_f` named `task<position>`.
    #[arg(long = "task", required = true)]
    pub tasks: Vec<String>,
}

#[derive(Args, Debug)]
pub struct RobustBoundArgs {
    #[arg(long)]
    pub margin: f64,
    #[arg(long)]
    pub lipschitz: f64,
}

#[derive(Args, Debug)]
pub struct CompareDimsArgs {
    #[arg(long)]
    pub d_data: f64,
    #[arg(long)]
    pub d_repr: f64,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "hypercube")]
    pub kind: KindArg,
    /// Intrinsic dimension.
    #[arg(long)]
    pub d: usize,
    /// Ambient dimension.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "random-orthogonal")]
    pub embedding: EmbeddingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    pub dtype: DtypeArg,
    /// Also label the cloud by a halfspace and write the labels here.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Points this close to the labeling hyperplane are dropped.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
}

#[derive(Args, Debug)]
pub struct SynthRecordsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a_true: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    /// Training sizes; every combination with the other lists becomes a record.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d_data: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_f: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Write the neighbor table as CSV instead of embedding it in the report.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["H", "W"], required = true)]
    pub resize: Vec<usize>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    pub dtype: DtypeArg,
}

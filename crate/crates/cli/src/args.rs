//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ikf::io::{ColumnRef, CsvSchema};
use ikf::rng::DEFAULT_SEED;
use ikf::{AssignmentStrategy, Metric, ModelSpec, Scheme};

#[derive(Debug, Parser)]
#[command(name = "ikf", version, about = "Irredundant k-fold cross-validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit train/test index partitions.
    Split(SplitArgs),
    /// Evaluate one scheme on a dataset.
    Run(RunArgs),
    /// Evaluate IkF and kF side by side as one results-table row.
    Compare(CompareArgs),
    /// Monte-Carlo moments of the cross-validation estimator.
    Montecarlo(MonteCarloArgs),
    /// Bias / variance / MSE trade-off over a range of k.
    Sweep(SweepArgs),
    /// Feasibility verdict for a configuration; exits 2 when infeasible.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Json,
    Md,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Ikf,
    Kf,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Ikf => Scheme::Ikf,
            SchemeArg::Kf => Scheme::Kf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    Ikf,
    Kf,
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeChoice::Ikf => vec![Scheme::Ikf],
            SchemeChoice::Kf => vec![Scheme::Kf],
            SchemeChoice::Both => vec![Scheme::Ikf, Scheme::Kf],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Assignment {
    /// Canonical cyclic shift.
    Shift,
    /// One random permutation per column.
    Latin,
}

impl From<Assignment> for AssignmentStrategy {
    fn from(a: Assignment) -> Self {
        match a {
            Assignment::Shift => AssignmentStrategy::CanonicalShift,
            Assignment::Latin => AssignmentStrategy::RandomLatin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Knn,
    Nb,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Acc,
    Fsc,
    FscBinary,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Acc => Metric::Accuracy,
            MetricArg::Fsc => Metric::FScoreMacro,
            MetricArg::FscBinary => Metric::FScoreBinary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Two unit-variance 1-D Gaussians at 0 and `--separation`.
    Gauss1d,
    /// `--classes` isotropic blobs in `--dims` dimensions.
    Blobs,
}

/// Where samples come from: a CSV file or a synthetic generator.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file to load.
    #[arg(long, conflicts_with = "synthetic")]
    pub csv: Option<PathBuf>,
    /// Field delimiter for --csv.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The CSV file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Label column: header name or 0-based index (negative counts from the end).
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub label_column: String,
    /// Feature columns (comma separated); default is every other column.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub features: Option<Vec<String>>,
    /// Synthetic generator preset.
    #[arg(long, value_enum)]
    pub synthetic: Option<Preset>,
    /// Number of samples (synthetic data, or bare index count for `split`).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Distance between neighbouring class means.
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    /// Seed for synthetic data; defaults to --seed.
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Z-score every feature column before evaluation.
    #[arg(long)]
    pub standardize: bool,
}

impl DataArgs {
    pub fn csv_schema(&self) -> Option<anyhow::Result<CsvSchema>> {
        let path = self.csv.as_ref()?;
        Some((|| {
            anyhow::ensure!(self.delimiter.is_ascii(), "delimiter must be a single ASCII character");
            Ok(CsvSchema {
                path: path.clone(),
                delimiter: self.delimiter as u8,
                has_header: !self.no_header,
                label_column: self.label_column.parse::<ColumnRef>()?,
                feature_columns: self
                    .features
                    .as_ref()
                    .map(|cols| cols.iter().map(|c| c.parse::<ColumnRef>()).collect::<Result<_, _>>())
                    .transpose()?,
            })
        })())
    }
}

/// Partitioning options shared by every evaluating command.
#[derive(Debug, Clone, Args)]
pub struct PartitionArgs {
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// 64-bit seed; the flag takes precedence over IKF_SEED.
    #[arg(long, env = "IKF_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Preserve class proportions in every fold and subfold.
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, value_enum, default_value_t = Assignment::Latin)]
    pub assignment: Assignment,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub parallel: Toggle,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Knn)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 5)]
    pub neighbors: usize,
    /// Class predicted by `--model constant`.
    #[arg(long, default_value_t = 0)]
    pub constant_class: usize,
}

impl ModelArgs {
    pub fn spec(&self) -> ModelSpec {
        match self.model {
            ModelArg::Knn => ModelSpec::Knn {
                neighbors: self.neighbors,
            },
            ModelArg::Nb => ModelSpec::GaussianNb,
            ModelArg::Constant => ModelSpec::Constant {
                class: self.constant_class,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Class labels for stratified splits without a dataset (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["csv", "synthetic"])]
    pub labels: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Ikf)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SchemeArg::Ikf)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "acc,fsc")]
    pub metrics: Vec<MetricArg>,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "acc,fsc")]
    pub metrics: Vec<MetricArg>,
    /// Repetitions per scheme; repeat r uses seed `seed ^ r`.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Both)]
    pub scheme: SchemeChoice,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = MetricArg::Acc)]
    pub metric: MetricArg,
    #[arg(long, visible_alias = "reps", default_value_t = 200)]
    pub repetitions: usize,
    /// Known target risk for bias and MSE.
    #[arg(long, conflicts_with = "estimate_reference")]
    pub reference_risk: Option<f64>,
    /// Estimate the target risk on a large fresh holdout (synthetic data only).
    #[arg(long)]
    pub estimate_reference: bool,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10")]
    pub k_values: Vec<usize>,
    #[arg(long, visible_alias = "reps", default_value_t = 200)]
    pub repetitions: usize,
    #[arg(long, env = "IKF_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Known target risk; estimated from a fresh holdout when omitted.
    #[arg(long)]
    pub reference_risk: Option<f64>,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub parallel: Toggle,
    #[arg(long, value_enum, default_value_t = SweepFormat::Md)]
    pub format: SweepFormat,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Total sample count; defaults to the sum of --classes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Per-class sample counts (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, value_enum, default_value_t = SchemeArg::Ikf)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

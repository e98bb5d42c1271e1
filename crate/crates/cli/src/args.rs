use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fraudstream", version, about = "Imbalanced fraud detection: static cross-validation and sliding-window streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic transaction dataset and/or numbered batch files.
    Gen(GenArgs),
    /// Grid-searched k-fold cross-validation per model and balancer.
    Static(StaticArgs),
    /// Sliding-window train/test over micro-batches.
    Stream(StreamArgs),
    /// Significance test on the AUC arrays of two result files.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct Shared {
    /// Master seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Flat key=value file; keys are long flag names, flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of generated records.
    #[arg(long, default_value_t = 100_000)]
    pub records: usize,
    #[arg(long, default_value_t = 10)]
    pub features: usize,
    /// Positive-class fraction.
    #[arg(long, default_value_t = 0.122)]
    pub fraction: f64,
    /// Shift of the positive mean on informative features, in standard deviations.
    #[arg(long, default_value_t = 1.5)]
    pub separation: f64,
    #[arg(long, default_value_t = 2)]
    pub informative: usize,
    /// Minimum positives guaranteed in every batch.
    #[arg(long, default_value_t = 2)]
    pub min_positives: usize,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    /// SMOTE/ADASYN neighbourhood size.
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
    /// ENN neighbourhood size.
    #[arg(long, default_value_t = 3)]
    pub enn_k: usize,
    /// Minority/majority ratio reached by oversampling; 1.0 is full balance.
    #[arg(long, default_value_t = 1.0)]
    pub target_ratio: f64,
    /// GAN training epochs (generator updates).
    #[arg(long, default_value_t = 10_000)]
    pub gan_epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub gan_batch: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct GenArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Dataset CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for batch_NNNNNN.csv files.
    #[arg(long)]
    pub batches_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub batch_size: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct StaticArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub balance: BalanceArgs,
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Comma-separated model names.
    #[arg(long, default_value = "nb,lr,svm,dt,rf,gbt,mlp")]
    pub models: String,
    /// Comma-separated balancer names, or `all`.
    #[arg(long, default_value = "none")]
    pub balancer: String,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Training share of the stratified holdout split.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Columns with a larger null fraction are dropped.
    #[arg(long, default_value_t = 0.9)]
    pub null_threshold: f64,
    /// Grid override `key=v1,v2,...`; replaces that axis for models whose grid has it.
    #[arg(long = "param", value_name = "KEY=VALUES")]
    pub params: Vec<String>,
    /// JSON-lines results file.
    #[arg(long, default_value = "static_results.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct StreamArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub balance: BalanceArgs,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Watch this directory for batch_NNNNNN.csv files.
    #[arg(long, conflicts_with = "gen_inline")]
    pub batches_dir: Option<PathBuf>,
    /// Generate the batches in memory instead.
    #[arg(long)]
    pub gen_inline: bool,
    #[arg(long, default_value = "label")]
    pub label: String,
    #[arg(long, default_value_t = 2)]
    pub ws: usize,
    #[arg(long, default_value_t = 1)]
    pub sl: usize,
    #[arg(long, default_value_t = 1000)]
    pub batch_size: usize,
    #[arg(long, default_value = "lr,knn,dt,rf")]
    pub models: String,
    /// Balancer applied to each window's training batches.
    #[arg(long, default_value = "none")]
    pub balancer: String,
    /// Hyperparameter `key=value` for every model that uses the key.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Delay between replayed batches.
    #[arg(long, default_value_t = 0)]
    pub interval_ms: u64,
    /// Directory polling period.
    #[arg(long, default_value_t = 50)]
    pub poll_ms: u64,
    /// End a directory stream after this long without a new file.
    #[arg(long, default_value_t = 5000)]
    pub idle_timeout_ms: u64,
    /// Report every latency as 0 so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// JSON-lines window results.
    #[arg(long, default_value = "stream_results.jsonl")]
    pub out: PathBuf,
    /// Directory for per-model `window_id,auc` CSV series; defaults to the output's directory.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Ttest,
    Wilcoxon,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// First result file.
    #[arg(long)]
    pub a: PathBuf,
    /// Second result file; defaults to the first.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Select results of this model in the first file.
    #[arg(long)]
    pub model_a: Option<String>,
    #[arg(long)]
    pub model_b: Option<String>,
    /// Select results of this balancer (static files).
    #[arg(long)]
    pub balancer_a: Option<String>,
    #[arg(long)]
    pub balancer_b: Option<String>,
    #[arg(long, value_enum, default_value = "ttest")]
    pub test: TestKind,
    /// Paired t-test (df = n - 1) instead of the pooled two-sample test.
    #[arg(long)]
    pub paired: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Also write the result as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spnknn_core::Method;

#[derive(Debug, Parser)]
#[command(name = "spnknn", version, about = "Remaining-time prediction with kNN-selected stochastic Petri nets")]
pub struct Cli {
    /// TOML file with default values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Only print errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    /// More diagnostics on stderr (repeat for trace output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics of a log.
    Stats(StatsArgs),
    /// Discover a workflow net with the Inductive Miner.
    Discover(DiscoverArgs),
    /// Predict the remaining time of one case.
    Predict(PredictArgs),
    /// Run the periodic evaluation over a test log.
    Evaluate(EvaluateArgs),
    /// Write a synthetic two-variant log as CSV.
    Generate(GenerateArgs),
}

/// How CSV logs are read. XES input ignores these.
#[derive(Debug, Args, Default, Clone)]
pub struct CsvArgs {
    /// CSV column holding the case id [default: case_id].
    #[arg(long)]
    pub case_column: Option<String>,
    /// CSV column holding the activity [default: activity].
    #[arg(long)]
    pub activity_column: Option<String>,
    /// CSV column holding the timestamp [default: timestamp].
    #[arg(long)]
    pub timestamp_column: Option<String>,
    /// rfc3339, epoch_ms, epoch_s or a strftime pattern [default: rfc3339].
    #[arg(long)]
    pub timestamp_format: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: StatsFormat,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatsFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub log: PathBuf,
    /// PNML output; without any output flag the PNML goes to stdout.
    #[arg(long)]
    pub pnml: Option<PathBuf>,
    /// Graphviz output.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Enrich the net with durations and routing weights fitted on the log.
    #[arg(long)]
    pub annotate: bool,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Log holding the running case.
    #[arg(long)]
    pub log: PathBuf,
    /// Training log; defaults to every other case of --log.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long = "case")]
    pub case_id: String,
    /// Prediction time: an ISO-8601 timestamp, or an offset from the case
    /// start such as `+90m`, `+2h`, `+1.5d` (units ms, s, m, h, d; bare
    /// numbers are seconds).
    #[arg(long, allow_hyphen_values = true)]
    pub t0: String,
    /// Methods to run, comma separated [default: gdtspn_knn].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
}

/// Hyperparameters shared by `predict` and `evaluate`.
#[derive(Debug, Args, Default, Clone)]
pub struct ParamArgs {
    /// Neighbors per prediction [default: 100].
    #[arg(long)]
    pub k: Option<usize>,
    /// Simulation runs per prediction [default: 500].
    #[arg(long)]
    pub n: Option<usize>,
    /// Firing limit of one simulation run [default: 10000].
    #[arg(long)]
    pub max_firings: Option<usize>,
    /// Seed for all randomness [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Average benchmarks predict the full mean duration instead of
    /// subtracting the elapsed time.
    #[arg(long)]
    pub raw_average: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, requires = "test", conflicts_with_all = ["log", "synthetic"])]
    pub train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Single log split out-of-time; see --split-test-count.
    #[arg(long, conflicts_with = "synthetic")]
    pub log: Option<PathBuf>,
    /// Number of latest-starting cases used as the test log [default: 500].
    #[arg(long)]
    pub split_test_count: Option<usize>,
    /// Evaluate on a generated two-variant log instead of files.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, default_value_t = 2000)]
    pub synthetic_train: usize,
    #[arg(long, default_value_t = 200)]
    pub synthetic_test: usize,
    /// Iterations per mean case duration; 2N iterations are run [default: 20].
    #[arg(long = "N")]
    pub iterations: Option<usize>,
    /// Methods to evaluate, comma separated [default: all five].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Report file; `.json` selects JSON unless --format is given. Without
    /// it the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Directory receiving one tab-separated series per metric.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub cases: usize,
    /// Share of cases following the fast ⟨A, B, C, E⟩ variant.
    #[arg(long, default_value_t = 0.6)]
    pub variant_one_share: f64,
    /// First case start, epoch milliseconds.
    #[arg(long, default_value_t = 1_577_836_800_000)]
    pub start: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

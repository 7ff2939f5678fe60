use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpmm::timing::{Aggregator, TimingPolicy};
use mpmm::tuner::DEFAULT_SIMPLE_MAX_N;
use mpmm::PrecisionSpec;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "mpmm-bench",
    version,
    about = "Tune, benchmark and verify multiple-precision matrix multiplication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sweep a (precision, n, threads) grid and write a tuning table.
    Tune(TuneArgs),
    /// Check the three algorithms against each other and exact references.
    Verify(VerifyArgs),
    /// Compare slice predictions with measured blocked times for one n.
    Predict(PredictArgs),
    /// Render a tuning table as CSV or a winners grid.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    /// Untimed runs before each measurement.
    #[arg(long, default_value_t = 0)]
    pub warmup: usize,
    /// Timed runs per measurement.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = Aggregator::Median)]
    pub aggregate: Aggregator,
    /// Untimed multiplies before each (precision, threads) group.
    #[arg(long, default_value_t = 1)]
    pub group_warmups: usize,
}

impl TimingArgs {
    pub fn policy(&self) -> TimingPolicy {
        TimingPolicy {
            warmup_runs: self.warmup,
            measured_runs: self.runs,
            aggregator: self.aggregate,
            group_warmups: self.group_warmups,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    /// Precisions: dd, qd or ap:<bits>.
    #[arg(long, value_delimiter = ',', required = true)]
    pub prec: Vec<PrecisionSpec>,
    /// Dimensions; `n±1` (or `n+-1`) adds the neighbours.
    #[arg(long)]
    pub dims: String,
    /// Block size candidates, ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    pub nmin: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub threads: Vec<usize>,
    /// Tuning table to write.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV report to write [default: the table path with a .csv extension].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Measure every candidate in full instead of predicting.
    #[arg(long)]
    pub no_predict: bool,
    /// Slice rows are this multiple of n_min.
    #[arg(long, default_value_t = mpmm::predictor::DEFAULT_SLICE_MULTIPLIER)]
    pub slice_mult: usize,
    /// Strassen recursion stops at or below this dimension.
    #[arg(long, default_value_t = mpmm::matmul::DEFAULT_STRASSEN_CUTOFF)]
    pub cutoff: usize,
    /// Skip timing simple multiplication above this dimension.
    #[arg(long, default_value_t = DEFAULT_SIMPLE_MAX_N, conflicts_with = "simple_always")]
    pub simple_max: usize,
    /// Time simple multiplication at every dimension.
    #[arg(long)]
    pub simple_always: bool,
    #[command(flatten)]
    pub timing: TimingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub prec: Vec<PrecisionSpec>,
    #[arg(long)]
    pub dims: String,
    /// Thread count compared against the single-threaded run.
    #[arg(long, default_value_t = 2)]
    pub threads: usize,
    #[arg(long, default_value_t = 16)]
    pub nmin: usize,
    #[arg(long, default_value_t = 16)]
    pub cutoff: usize,
    /// Perturb the Strassen result to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub prec: PrecisionSpec,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub nmin: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = mpmm::predictor::DEFAULT_SLICE_MULTIPLIER)]
    pub slice_mult: usize,
    /// Strassen cutoff for the reference column.
    #[arg(long, default_value_t = mpmm::matmul::DEFAULT_STRASSEN_CUTOFF)]
    pub cutoff: usize,
    /// Skip the Strassen reference time.
    #[arg(long)]
    pub no_strassen: bool,
    #[command(flatten)]
    pub timing: TimingArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Winners,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
}

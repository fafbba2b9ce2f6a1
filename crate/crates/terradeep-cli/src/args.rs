use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use terradeep::data::InputMode;
use terradeep::zoo::Task;

#[derive(Debug, Parser)]
#[command(
    name = "terradeep",
    about = "Slip and terrain classification experiments on wheel telemetry and ground imagery",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus and write it to disk (telemetry CSV or
    /// per-class PGM directories)
    Synth(ExperimentArgs),
    /// Extract feature vectors from a dataset and write them as CSV
    Features(ExperimentArgs),
    /// Train one catalog learner and save the model plus its epoch curve
    Train(ExperimentArgs),
    /// Score a saved model against a dataset and write an evaluation report
    Eval(EvalArgs),
    /// Run every catalog learner in both input modes over the split plan and
    /// write per-cell reports plus a summary table
    Benchmark(ExperimentArgs),
    /// Audit analytic gradients against finite differences and print the
    /// worst relative error per architecture
    Gradcheck(GradcheckArgs),
    /// Print the learner catalog as JSON
    Zoo,
}

/// `--task` values; mirrors the catalog's task axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Slip,
    Image,
}

impl TaskArg {
    pub fn to_task(self) -> Task {
        match self {
            TaskArg::Slip => Task::Slip,
            TaskArg::Image => Task::Image,
        }
    }
}

/// `--mode` values; how inputs are presented to the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Raw,
    Filtered,
}

impl ModeArg {
    pub fn to_mode(self) -> InputMode {
        match self {
            ModeArg::Raw => InputMode::Raw,
            ModeArg::Filtered => InputMode::Filtered,
        }
    }
}

/// Flags shared by the experiment-shaped subcommands. Everything is
/// optional at parse time; required pieces are checked per subcommand after
/// the config file (if any) is merged in.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// Problem family: slip (telemetry) or image (terrain)
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,

    /// Catalog learner name (see `terradeep zoo`)
    #[arg(long)]
    pub learner: Option<String>,

    /// Input presentation: raw signals/pixels or filtered features
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Dataset path: telemetry CSV (slip) or image directory (image)
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,

    /// Use the seeded synthetic corpus instead of --data
    #[arg(long)]
    pub synth: bool,

    /// Per-class synthetic volume: telemetry frames or images
    #[arg(long)]
    pub count: Option<usize>,

    /// Causal variance window, frames
    #[arg(long)]
    pub nw: Option<usize>,

    /// Synthetic image edge length in pixels (64 or 128)
    #[arg(long)]
    pub size: Option<usize>,

    /// Training epochs override
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Minibatch size override
    #[arg(long)]
    pub batch: Option<usize>,

    /// Master seed; every random choice derives from it
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// JSON config file; explicit flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Saved model file to score
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Master seed for probe batches and parameter subsets
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use imforest::decision::DecisionMode;
use imforest::io::SyntheticKind;
use imforest::Error;

mod commands;

/// Anomaly scoring with Mondrian isolation trees that grow as data arrives.
#[derive(Debug, Parser)]
#[command(name = "imforest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a forest, save it, and export in-sample scores.
    Fit(FitArgs),
    /// Score points against a saved model.
    Score(ScoreArgs),
    /// Staged streaming run: train on the first stage, extend on the rest.
    Stream(StreamArgs),
    /// Stratified k-fold evaluation with train and test AUC.
    Cv(CvArgs),
    /// Timing table for train, score and extend on uniform data.
    Bench(BenchArgs),
    /// Write a synthetic labeled dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct CsvArgs {
    /// Label column by header name (values 0/1, 1 = anomaly).
    #[arg(long, conflicts_with = "label_index")]
    label_column: Option<String>,
    /// Label column by 0-based position.
    #[arg(long)]
    label_index: Option<usize>,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// CSV dataset.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Built-in synthetic set: gaussian-blob, ring, two-blobs, grid-cluster
    /// (or a, b, c, d). Generated from --seed.
    #[arg(long)]
    synthetic: Option<SyntheticKind>,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trees: u64,
    /// Per-tree subsample size; 0 trains every tree on all points.
    #[arg(long, default_value_t = 256)]
    psi: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[arg(long, default_value_t = DecisionMode::Threshold)]
    mode: DecisionMode,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Where to save the model.
    #[arg(long)]
    model: PathBuf,
    /// Score CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    /// Points to score.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Refit the label rule on these scores instead of using the saved one.
    #[arg(long)]
    mode: Option<DecisionMode>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StreamArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    stages: u64,
    #[arg(long, default_value_t = DecisionMode::KMeans)]
    mode: DecisionMode,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Re-score only the latest W points after each stage.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    window: Option<u64>,
    /// Dump scores on an N x N lattice after each stage (2-D data only).
    #[arg(long, requires = "out", value_parser = clap::value_parser!(u64).range(2..))]
    grid: Option<u64>,
    /// Output directory for stages.csv (and grid.csv); table to stdout if
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trees: u64,
    /// Worker count for the multi-threaded rows; defaults to all cores.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    bench_threads: Option<u64>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [4096usize, 8192, 16384, 32768])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    synthetic: SyntheticKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage errors exit 2 (as clap does), data errors 3, infeasible
/// stratification 4.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::Infeasible(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Score(args) => commands::score(args),
        Command::Stream(args) => commands::stream(args),
        Command::Cv(args) => commands::cv(args),
        Command::Bench(args) => commands::bench(args),
        Command::Generate(args) => commands::generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

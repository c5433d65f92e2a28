//! `pathquery`: ingest → gen-paths → train → eval → analyze → query, plus a
//! grid runner and a one-shot pipeline.

mod commands;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathquery_core::Error;

#[derive(Parser)]
#[command(name = "pathquery", version, about = "Compositional path-query embeddings for knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate triple files and print graph statistics.
    Ingest(IngestArgs),
    /// Sample training and test path-query datasets by random walks.
    GenPaths(GenPathsArgs),
    /// Train one model and write a checkpoint and training log.
    Train(TrainArgs),
    /// Score a path-query dataset: mean quantile and hits@k.
    Eval(EvalArgs),
    /// Reconstruction-quality profiles and the Δdist report.
    Analyze(AnalyzeArgs),
    /// Rank the answers to one path query.
    Query(QueryArgs),
    /// Train and evaluate over a grid of models, dimensions and step sizes.
    Grid(GridArgs),
    /// Generate paths, train single and comp models, evaluate and analyze.
    Pipeline(PipelineArgs),
}

#[derive(Args, Clone)]
pub struct GraphArgs {
    /// Training triples, one `source<TAB>relation<TAB>target` per line.
    #[arg(long)]
    pub triples: PathBuf,
    /// Held-out (or complete) triples; unioned with the training triples.
    #[arg(long)]
    pub full_triples: Option<PathBuf>,
}

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Also write canonical triple files and a summary here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Accepted for uniformity; ingestion is not randomized.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct GenPathsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub max_length: usize,
    /// Multi-hop walks added on top of the training edges.
    #[arg(long, default_value_t = 10_000)]
    pub train_count: usize,
    /// Test walks drawn before removing queries seen in training.
    #[arg(long, default_value_t = 1_000)]
    pub test_count: usize,
}

#[derive(Args, Clone, Default)]
pub struct TrainOverrides {
    /// Training config file (`key=value` lines); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = ["bilinear", "bilinear-diag", "transe"])]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_parser = ["single", "comp"])]
    pub curriculum: Option<String>,
    #[arg(long = "aux-l2")]
    pub aux_l2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Training path queries from `gen-paths`.
    #[arg(long)]
    pub paths: PathBuf,
    #[command(flatten)]
    pub train: TrainOverrides,
    /// Checkpoint to write; defaults to `<out-dir>/model.ckpt`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Directory for the checkpoint, training log and effective config.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Training is single-threaded so that runs are reproducible; this
    /// flag is accepted and ignored.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Clone)]
pub struct EvalOpts {
    #[arg(long, default_value = "full", value_parser = ["full", "train"])]
    pub eval_graph: String,
    /// Cutoff for hits@k.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Test path queries.
    #[arg(long)]
    pub paths: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub eval: EvalOpts,
    /// Write `eval.csv` here instead of printing it.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Compositionally trained checkpoint.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Single-edge trained Bilinear checkpoint; enables the Δdist report.
    #[arg(long, requires = "relation")]
    pub baseline: Option<PathBuf>,
    /// Head relation for the Δdist report.
    #[arg(long, requires = "baseline")]
    pub relation: Option<String>,
    /// Precision above which a path type is "high".
    #[arg(long, default_value_t = pathquery_core::analysis::DEFAULT_PRECISION_THRESHOLD)]
    pub threshold: f64,
    /// Query `s/r1/.../rk` to profile; repeatable.
    #[arg(long)]
    pub query: Vec<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// `s/r1/.../rk`
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Training path queries.
    #[arg(long)]
    pub paths: PathBuf,
    /// Test path queries.
    #[arg(long)]
    pub test_paths: PathBuf,
    #[command(flatten)]
    pub train: TrainOverrides,
    #[arg(long, value_delimiter = ',', default_value = "bilinear,bilinear-diag,transe")]
    pub models: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub step_sizes: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "single,comp")]
    pub curricula: Vec<String>,
    #[command(flatten)]
    pub eval: EvalOpts,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Pipeline config: training keys plus `triples`, `full_triples`,
    /// `models`, `max_length`, `train_count`, `test_count`, `hits_k`,
    /// `eval_graph`, `relation` and `rq_query`.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides `triples` from the config.
    #[arg(long)]
    pub triples: Option<PathBuf>,
    /// Overrides `full_triples` from the config.
    #[arg(long)]
    pub full_triples: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// A command failure with its exit code: 1 usage, 2 data resolution,
/// 3 numeric failure.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    /// Prefixes the message with the stage that failed.
    pub fn at(mut self, stage: &str) -> Self {
        self.message = format!("{stage}: {}", self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => 1,
            Error::NonFinite(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::GenPaths(a) => commands::gen_paths(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Query(a) => commands::query(a),
        Command::Grid(a) => commands::grid(a),
        Command::Pipeline(a) => pipeline::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

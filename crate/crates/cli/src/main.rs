//! Batch command-line surface for prompt-based hypernym prediction.
//!
//! Subcommands: `evaluate` (AP/MAP sweeps over datasets), `cohypo`
//! (co-hyponym discovery pipeline), `iterate` (iterative chain ranking),
//! `correlate` (prompt results vs pattern precision scores), and `score`
//! (single-pair debugging).
//!
//! Exit codes: 0 success, 2 configuration error, 3 backend failure after
//! retries. Stdout carries exactly one final summary line; diagnostics go
//! to stderr.

mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};

use config::CommonArgs;

#[derive(Parser)]
#[command(name = "taxoprompt", version, about = "Zero-shot hypernym prediction with prompt-based log-probability scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score prompts over datasets and report detection AP and MAP.
    Evaluate(EvaluateArgs),
    /// Discover co-hyponyms for target words (neighbors, filters, rerank).
    Cohypo(CohypoArgs),
    /// Iterative hypernym-chain ranking with step-last / step-mean MAP.
    Iterate(IterateArgs),
    /// Correlate prompt results with pattern precision scores.
    Correlate(CorrelateArgs),
    /// Score a single (hyponym, hypernym[, co-hyponym]) triple.
    Score(ScoreArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dataset as name=path; repeatable.
    #[arg(long = "dataset", value_name = "NAME=PATH", required = true)]
    datasets: Vec<String>,
    /// Column remap, e.g. hypo=0,candidate=1,label=2,relation=3,fold=4.
    #[arg(long)]
    schema: Option<String>,
    /// Folds for MAP pools: "all" or a comma list of val/test/all.
    #[arg(long, default_value = "all")]
    folds: String,
    /// Prompt catalog file; defaults to the bundled catalog.
    #[arg(long)]
    catalog: Option<std::path::PathBuf>,
    /// Comma list of prompt ids to run (default: every catalog row).
    #[arg(long)]
    prompts: Option<String>,
    /// Comma list of prompt ids scored together as one combination row;
    /// repeatable.
    #[arg(long = "combine", value_name = "ID,ID,...")]
    combine: Vec<String>,
    /// Augment prompts with discovered co-hyponyms (needs --embeddings and
    /// --lexicon; switches the default catalog to the augmented one).
    #[arg(long)]
    augment: bool,
    #[arg(long)]
    embeddings: Option<std::path::PathBuf>,
    #[arg(long)]
    lexicon: Option<std::path::PathBuf>,
    /// Skip words whose co-hyponym discovery fails instead of aborting.
    #[arg(long = "oov-skip")]
    oov_skip: bool,
}

#[derive(Args)]
struct CohypoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma list of target words.
    #[arg(long)]
    targets: Option<String>,
    /// File with one target word per line.
    #[arg(long = "targets-file")]
    targets_file: Option<std::path::PathBuf>,
    #[arg(long, required = true)]
    embeddings: std::path::PathBuf,
    #[arg(long, required = true)]
    lexicon: std::path::PathBuf,
    #[arg(long = "top-n", default_value_t = 100)]
    top_n: usize,
    #[arg(long = "levenshtein-min", default_value_t = 3)]
    levenshtein_min: usize,
    #[arg(long = "keep-k", default_value_t = 10)]
    keep_k: usize,
    /// Rerank prompt id from the co-hyponym catalog.
    #[arg(long = "rerank-prompt")]
    rerank_prompt: Option<String>,
    /// Catalog file for the rerank prompt; defaults to the bundled
    /// co-hyponym catalog.
    #[arg(long)]
    catalog: Option<std::path::PathBuf>,
    /// Skip out-of-vocabulary targets instead of aborting.
    #[arg(long = "oov-skip")]
    oov_skip: bool,
}

#[derive(Args)]
struct IterateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dataset as name=path.
    #[arg(long = "dataset", value_name = "NAME=PATH", required = true)]
    dataset: String,
    #[arg(long)]
    schema: Option<String>,
    #[arg(long, default_value = "all")]
    folds: String,
    #[arg(long)]
    catalog: Option<std::path::PathBuf>,
    #[arg(long)]
    prompts: Option<String>,
    #[arg(long = "combine", value_name = "ID,ID,...")]
    combine: Vec<String>,
    #[arg(long = "max-steps", default_value_t = taxoprompt::iterative::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Write one trace JSON per target under <output-dir>/traces/.
    #[arg(long = "dump-traces")]
    dump_traces: bool,
    #[arg(long)]
    augment: bool,
    #[arg(long)]
    embeddings: Option<std::path::PathBuf>,
    #[arg(long)]
    lexicon: Option<std::path::PathBuf>,
    #[arg(long = "oov-skip")]
    oov_skip: bool,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// TSV of prompt results: header row, first column the prompt id,
    /// remaining columns numeric (as written by evaluate's prompt summary).
    #[arg(long = "prompt-results", required = true)]
    prompt_results: std::path::PathBuf,
    /// Two-column TSV of pattern id and precision score.
    #[arg(long = "pattern-scores", required = true)]
    pattern_scores: std::path::PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    hypo: String,
    #[arg(long)]
    hyper: Option<String>,
    #[arg(long)]
    cohypo: Option<String>,
    /// Prompt id; searched in the bundled catalogs unless --catalog is
    /// given.
    #[arg(long, required = true)]
    template: String,
    #[arg(long)]
    catalog: Option<std::path::PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Cohypo(args) => commands::cohypo::run(args),
        Command::Iterate(args) => commands::iterate::run(args),
        Command::Correlate(args) => commands::correlate::run(args),
        Command::Score(args) => commands::score::run(args),
    };
    match outcome {
        Ok(summary) => println!("{summary}"),
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(error.exit_code());
        }
    }
}

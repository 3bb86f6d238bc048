//! `candela`: counter-argument generation pipeline driver.
//!
//! Each subcommand wraps one pipeline stage and exchanges line-delimited
//! JSON with its neighbors, so stages can run standalone or be chained:
//!
//! ```text
//! ingest -> segment -> index -> retrieve -> rank -> keyphrases
//!                                 \-> prep -> train -> generate -> evaluate
//! ```
//!
//! Configuration comes from one flat `key = value` file (`--config`);
//! command-line flags override file values. The master `seed` derives a
//! stable per-stage seed for anything randomized. Every subcommand writes
//! `<output>.manifest.json` recording the configuration, input digests,
//! seed, and stage timings; runs with identical manifests (timings aside)
//! produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 input rejection, 2 internal invariant
//! violation, 64 usage error.

mod analysis;
mod commands;
mod errors;
mod jsonl;
mod manifest;
mod resources;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use candela_core::config::PipelineConfig;
use clap::{Args, Parser, Subcommand};

use errors::Result;

#[derive(Parser)]
#[command(name = "candela", version, about = "Counter-argument generation pipeline")]
struct Cli {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file's `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read raw article records, deduplicate, and drop short articles.
    Ingest(InOutArgs),
    /// Split articles into overlapping sentence-window passages.
    Segment(InOutArgs),
    /// Build the binary retrieval index over passages.
    Index(InOutArgs),
    /// Retrieve passages for a statement from an index.
    Retrieve(RetrieveArgs),
    /// Rank retrieved passages for a statement.
    Rank(RankArgs),
    /// Extract keyphrases from ranked passages.
    Keyphrases(KeyphrasesArgs),
    /// Build training pairs from debate records and an index.
    Prep(PrepArgs),
    /// Train the generator on prepared pairs.
    Train(InOutArgs),
    /// Generate a counter-argument for a statement.
    Generate(GenerateArgs),
    /// Score hypothesis arguments against references.
    Evaluate(EvaluateArgs),
    /// Verify analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct InOutArgs {
    /// Input file (format depends on the stage).
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Output file; a run manifest lands next to it.
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
}

#[derive(Args)]
struct RetrieveArgs {
    /// Statement text file.
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Binary index built by `candela index`.
    #[arg(long, value_name = "FILE")]
    pub(crate) index: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Results per (query, medium); overrides `retrieval_topk`.
    #[arg(long, value_name = "N")]
    pub(crate) topk: Option<usize>,
    /// Restrict retrieval to one medium (default: every medium indexed).
    #[arg(long, value_name = "NAME")]
    pub(crate) medium: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    /// Retrieved passages (JSON lines).
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Statement text file the passages answer.
    #[arg(long, value_name = "FILE")]
    pub(crate) statement: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Index supplying the topic-signature background (default: the
    /// input passages themselves).
    #[arg(long, value_name = "FILE")]
    pub(crate) index: Option<PathBuf>,
    /// Gold-argument text file; switches to oracle reranking.
    #[arg(long, value_name = "FILE")]
    pub(crate) oracle: Option<PathBuf>,
}

#[derive(Args)]
struct KeyphrasesArgs {
    /// Ranked passages (JSON lines).
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Statement text file supplying the topic signatures.
    #[arg(long, value_name = "FILE")]
    pub(crate) statement: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Index supplying the topic-signature background (default: the
    /// input passages themselves).
    #[arg(long, value_name = "FILE")]
    pub(crate) index: Option<PathBuf>,
}

#[derive(Args)]
struct PrepArgs {
    /// Debate records (JSON lines with `statement` and `argument`).
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Binary index to retrieve passages from.
    #[arg(long, value_name = "FILE")]
    pub(crate) index: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Results per (query, medium); overrides `retrieval_topk`.
    #[arg(long, value_name = "N")]
    pub(crate) topk: Option<usize>,
    /// Restrict retrieval to one medium.
    #[arg(long, value_name = "NAME")]
    pub(crate) medium: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Statement text file.
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Binary index to retrieve passages from.
    #[arg(long, value_name = "FILE")]
    pub(crate) index: PathBuf,
    /// Trained model checkpoint.
    #[arg(long, value_name = "FILE")]
    pub(crate) checkpoint: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Beam width; overrides `beam_width`.
    #[arg(long, value_name = "N")]
    pub(crate) beam: Option<usize>,
    /// Decoding token budget; overrides `max_decode_tokens`.
    #[arg(long = "max-tokens", value_name = "N")]
    pub(crate) max_tokens: Option<usize>,
    /// Results per (query, medium); overrides `retrieval_topk`.
    #[arg(long, value_name = "N")]
    pub(crate) topk: Option<usize>,
    /// Restrict retrieval to one medium.
    #[arg(long, value_name = "NAME")]
    pub(crate) medium: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Hypothesis arguments, one per line, whitespace-tokenized.
    #[arg(long, value_name = "FILE")]
    pub(crate) input: PathBuf,
    /// Reference arguments, aligned line by line with the input.
    #[arg(long, value_name = "FILE")]
    pub(crate) refs: PathBuf,
    /// Report destination (JSON lines; a rendered table lands next to it).
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
    /// Training pairs for the uncommon-word fractions (optional).
    #[arg(long, value_name = "FILE")]
    pub(crate) train: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Report destination (plain text).
    #[arg(long, value_name = "FILE")]
    pub(crate) output: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("candela: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref(), cli.seed)?;
    match &cli.command {
        Command::Ingest(args) => commands::corpus::ingest(&config, args),
        Command::Segment(args) => commands::corpus::segment(&config, args),
        Command::Index(args) => commands::corpus::index(&config, args),
        Command::Retrieve(args) => commands::retrieval::retrieve(&config, args),
        Command::Rank(args) => commands::retrieval::rank(&config, args),
        Command::Keyphrases(args) => commands::retrieval::keyphrases(&config, args),
        Command::Prep(args) => commands::prep::prep(&config, args),
        Command::Train(args) => commands::model::train(&config, args),
        Command::Generate(args) => commands::model::generate(&config, args),
        Command::Evaluate(args) => commands::eval::evaluate(&config, args),
        Command::Gradcheck(args) => commands::model::gradcheck(&config, args),
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

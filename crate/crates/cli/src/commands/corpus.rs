//! Corpus-side subcommands: ingest, segment, index.

use candela_core::config::PipelineConfig;
use candela_core::corpus as core_corpus;
use candela_core::corpus::{Article, Passage};

use crate::errors::Result;
use crate::jsonl;
use crate::manifest::{write_atomic, RunManifest, Timer};
use crate::resources::Resources;
use crate::InOutArgs;

/// Reads raw records (JSON lines), keeps deduplicated articles of at
/// least `min_article_words` words, and writes them as JSON lines.
pub fn ingest(config: &PipelineConfig, args: &InOutArgs) -> Result<()> {
    let mut manifest = RunManifest::new("ingest", config);
    manifest.record_input(&args.input)?;
    let mut timer = Timer::start();
    let res = Resources::load()?;
    let text = jsonl::read_text(&args.input)?;
    timer.lap(&mut manifest, "read");

    let (articles, report) =
        core_corpus::ingest(text.lines(), &res.tokenizer, config.min_article_words);
    timer.lap(&mut manifest, "ingest");

    write_atomic(&args.output, &jsonl::to_bytes(&articles)?)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "ingest: kept {} articles, rejected {} records",
        report.kept,
        report.rejections.len()
    );
    Ok(())
}

/// Splits each article into sliding sentence windows and keeps windows
/// with enough words.
pub fn segment(config: &PipelineConfig, args: &InOutArgs) -> Result<()> {
    let mut manifest = RunManifest::new("segment", config);
    manifest.record_input(&args.input)?;
    let mut timer = Timer::start();
    let articles: Vec<Article> = jsonl::read(&args.input)?;
    timer.lap(&mut manifest, "read");

    let mut passages = Vec::new();
    for article in &articles {
        passages.extend(core_corpus::segment(
            article,
            config.window_sentences,
            config.window_step,
            config.min_passage_words,
        ));
    }
    timer.lap(&mut manifest, "segment");

    write_atomic(&args.output, &jsonl::to_bytes(&passages)?)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "segment: {} articles -> {} passages",
        articles.len(),
        passages.len()
    );
    Ok(())
}

/// Builds the inverted retrieval index and writes it as one binary file.
pub fn index(config: &PipelineConfig, args: &InOutArgs) -> Result<()> {
    let mut manifest = RunManifest::new("index", config);
    manifest.record_input(&args.input)?;
    let mut timer = Timer::start();
    let passages: Vec<Passage> = jsonl::read(&args.input)?;
    let count = passages.len();
    timer.lap(&mut manifest, "read");

    let index = core_corpus::build_index(passages, config.bm25_k1, config.bm25_b)?;
    timer.lap(&mut manifest, "build");

    let mut bytes = Vec::new();
    index.write(&mut bytes)?;
    write_atomic(&args.output, &bytes)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "index: {count} passages, average length {:.1} words",
        index.avgdl()
    );
    Ok(())
}

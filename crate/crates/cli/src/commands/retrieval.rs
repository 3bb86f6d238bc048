//! Statement-side subcommands: retrieve, rank, keyphrases.

use std::collections::BTreeSet;
use std::path::Path;

use candela_core::config::PipelineConfig;
use candela_core::corpus::{Index, ScoredPassage};
use candela_core::ranker::{oracle_rerank, RankedPassage};
use candela_core::textproc::{extract_keyphrases, join_tokens, Keyphrase, TokenCounts};

use crate::analysis;
use crate::errors::{CliError, Result};
use crate::jsonl;
use crate::manifest::{write_atomic, RunManifest, Timer};
use crate::resources::Resources;
use crate::{KeyphrasesArgs, RankArgs, RetrieveArgs};

/// Formulates one query per eligible statement sentence, retrieves the
/// top passages per (query, medium), and merges the result lists.
pub fn retrieve(config: &PipelineConfig, args: &RetrieveArgs) -> Result<()> {
    let mut config = config.clone();
    if let Some(k) = args.topk {
        config.retrieval_topk = k;
    }
    config.validate()?;

    let mut manifest = RunManifest::new("retrieve", &config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.index)?;
    let mut timer = Timer::start();
    let res = Resources::load()?;
    let index = Index::read_from(&args.index, &res.tokenizer)?;
    timer.lap(&mut manifest, "load-index");

    let text = jsonl::read_text(&args.input)?;
    let sentences = analysis::analyze_sentences(&res, &text);
    if sentences.iter().all(|s| s.tokens.is_empty()) {
        return Err(CliError::input("statement contains no tokens"));
    }
    timer.lap(&mut manifest, "analyze");

    let merged = analysis::retrieve_merged(
        &index,
        &sentences,
        config.retrieval_topk,
        args.medium.as_deref(),
    );
    timer.lap(&mut manifest, "retrieve");

    write_atomic(&args.output, &jsonl::to_bytes(&merged)?)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "retrieve: {} passages for {} statement sentences",
        merged.len(),
        sentences.len()
    );
    Ok(())
}

/// Background counts for signature tests: the index's passages when one
/// is given, otherwise the input passages themselves.
fn background_for(
    res: &Resources,
    index_path: Option<&Path>,
    fallback: &[ScoredPassage],
) -> Result<TokenCounts> {
    match index_path {
        Some(p) => {
            let index = Index::read_from(p, &res.tokenizer)?;
            Ok(analysis::background_counts(index.docs()))
        }
        None => Ok(analysis::background_counts(
            fallback.iter().map(|s| &s.passage),
        )),
    }
}

/// Ranks retrieved passages for the statement. The default chain is
/// rank, diversity filter, stance filter, then the passage budget; with
/// `--oracle GOLD` the order comes from the gold-argument rerank instead.
pub fn rank(config: &PipelineConfig, args: &RankArgs) -> Result<()> {
    let mut manifest = RunManifest::new("rank", config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.statement)?;
    if let Some(p) = &args.index {
        manifest.record_input(p)?;
    }
    if let Some(p) = &args.oracle {
        manifest.record_input(p)?;
    }
    let mut timer = Timer::start();
    let res = Resources::load()?;
    let retrieved: Vec<ScoredPassage> = jsonl::read(&args.input)?;
    let background = background_for(&res, args.index.as_deref(), &retrieved)?;
    timer.lap(&mut manifest, "read");

    let text = jsonl::read_text(&args.statement)?;
    let stmt = analysis::analyze_statement(&res, config, &text, &background)?;
    timer.lap(&mut manifest, "analyze");

    let in_count = retrieved.len();
    let ranked = match &args.oracle {
        None => analysis::rank_chain(config, &stmt, retrieved),
        Some(gold_path) => {
            let gold_text = jsonl::read_text(gold_path)?;
            let gold = analysis::analyze_sentences(&res, &gold_text);
            let gold_tokens = analysis::flat_tokens(&gold);
            let (_, arg_words) =
                analysis::signature_set(&gold_tokens, &background, config.llr_threshold);
            let oracle = oracle_rerank(
                retrieved,
                &gold,
                &stmt.signature_words,
                &arg_words,
                &stmt.targets,
            )?;
            analysis::oracle_to_ranked(oracle, config.final_passages)
        }
    };
    timer.lap(&mut manifest, "rank");

    write_atomic(&args.output, &jsonl::to_bytes(&ranked)?)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!("rank: kept {} of {} passages", ranked.len(), in_count);
    Ok(())
}

/// Extracts keyphrases from the ranked passages under the statement's
/// expanded topic signatures, deduplicated across passages.
pub fn keyphrases(config: &PipelineConfig, args: &KeyphrasesArgs) -> Result<()> {
    let mut manifest = RunManifest::new("keyphrases", config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.statement)?;
    if let Some(p) = &args.index {
        manifest.record_input(p)?;
    }
    let mut timer = Timer::start();
    let res = Resources::load()?;
    let ranked: Vec<RankedPassage> = jsonl::read(&args.input)?;
    let scored: Vec<ScoredPassage> = ranked.iter().map(|r| r.passage.clone()).collect();
    let background = background_for(&res, args.index.as_deref(), &scored)?;
    timer.lap(&mut manifest, "read");

    let text = jsonl::read_text(&args.statement)?;
    let stmt = analysis::analyze_statement(&res, config, &text, &background)?;
    timer.lap(&mut manifest, "analyze");

    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut out: Vec<Keyphrase> = Vec::new();
    for rp in &ranked {
        let mut sentences = res
            .tokenizer
            .split_sentences(&join_tokens(&rp.passage.passage.tokens));
        for s in &mut sentences {
            res.tagger.tag(&mut s.tokens);
        }
        for kp in extract_keyphrases(&sentences, &stmt.expanded, &res.gazetteer, &res.vectors)? {
            if seen.insert(kp.words.clone()) {
                out.push(kp);
            }
        }
    }
    timer.lap(&mut manifest, "extract");

    write_atomic(&args.output, &jsonl::to_bytes(&out)?)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "keyphrases: {} distinct from {} passages",
        out.len(),
        ranked.len()
    );
    Ok(())
}

//! Training-data preparation: debates plus an index in, pairs out.

use candela_core::config::PipelineConfig;
use candela_core::corpus::Index;
use candela_core::dataprep::{write_pairs, PairAssembler};
use candela_core::ranker::oracle_rerank;
use candela_core::textproc::{Sentence, TokenCounts};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::errors::{CliError, Result};
use crate::jsonl;
use crate::manifest::{write_atomic, RunManifest, Timer};
use crate::resources::Resources;
use crate::PrepArgs;

/// One debate: an input statement and a gold counter-argument.
#[derive(Debug, Serialize, Deserialize)]
pub struct DebateRecord {
    pub statement: String,
    pub argument: String,
}

/// For each debate: retrieve passages for the statement, rerank them
/// against the gold argument, extract the keyphrase memory, and emit a
/// capped training pair. Debates with empty statements or arguments are
/// skipped and counted.
pub fn prep(config: &PipelineConfig, args: &PrepArgs) -> Result<()> {
    let mut config = config.clone();
    if let Some(k) = args.topk {
        config.retrieval_topk = k;
    }
    config.validate()?;

    let mut manifest = RunManifest::new("prep", &config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.index)?;
    let mut timer = Timer::start();
    let res = Resources::load()?;
    let debates: Vec<DebateRecord> = jsonl::read(&args.input)?;
    if debates.is_empty() {
        return Err(CliError::input("no debate records in input"));
    }
    let index = Index::read_from(&args.index, &res.tokenizer)?;
    timer.lap(&mut manifest, "read");

    // Statement signatures test against the whole passage corpus;
    // argument signatures test against all replies in the input set.
    let corpus_bg = analysis::background_counts(index.docs());
    let golds: Vec<Vec<Sentence>> = debates
        .iter()
        .map(|d| analysis::analyze_sentences(&res, &d.argument))
        .collect();
    let mut replies_bg = TokenCounts::new();
    for gold in &golds {
        let tokens = analysis::flat_tokens(gold);
        replies_bg.merge(&TokenCounts::from_tokens(&tokens));
    }
    timer.lap(&mut manifest, "background");

    let assembler = PairAssembler {
        tokenizer: &res.tokenizer,
        tagger: &res.tagger,
        gazetteer: &res.gazetteer,
        vectors: &res.vectors,
        markers: &res.markers,
        config: &config,
    };

    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for (debate, gold) in debates.iter().zip(&golds) {
        let gold_tokens = analysis::flat_tokens(gold);
        if gold_tokens.is_empty()
            || analysis::analyze_sentences(&res, &debate.statement)
                .iter()
                .all(|s| s.tokens.is_empty())
        {
            skipped += 1;
            continue;
        }
        let stmt = analysis::analyze_statement(&res, &config, &debate.statement, &corpus_bg)?;
        let retrieved = analysis::retrieve_merged(
            &index,
            &stmt.sentences,
            config.retrieval_topk,
            args.medium.as_deref(),
        );
        let (_, arg_words) =
            analysis::signature_set(&gold_tokens, &replies_bg, config.llr_threshold);
        let oracle = oracle_rerank(
            retrieved,
            gold,
            &stmt.signature_words,
            &arg_words,
            &stmt.targets,
        )?;
        let ranked = analysis::oracle_to_ranked(oracle, config.final_passages);
        match assembler.assemble(
            &stmt.sentences,
            &ranked,
            gold,
            &stmt.signature_words,
            &arg_words,
            &stmt.expanded,
        )? {
            Some(pair) => pairs.push(pair),
            None => skipped += 1,
        }
    }
    timer.lap(&mut manifest, "assemble");

    if pairs.is_empty() {
        return Err(CliError::input("no usable debate records"));
    }
    let mut bytes = Vec::new();
    write_pairs(&mut bytes, &pairs)?;
    write_atomic(&args.output, &bytes)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "prep: {} pairs from {} debates ({} skipped)",
        pairs.len(),
        debates.len(),
        skipped
    );
    Ok(())
}

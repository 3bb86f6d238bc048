//! Scoring generated arguments against references.

use std::collections::BTreeMap;

use candela_core::config::PipelineConfig;
use candela_core::dataprep::{read_pairs, TrainingPair};
use candela_core::evalkit::{evaluate_corpus, render_table, PairScores};
use serde::Serialize;

use crate::errors::Result;
use crate::jsonl;
use crate::manifest::{suffixed, write_atomic, RunManifest, Timer};
use crate::EvaluateArgs;

#[derive(Serialize)]
struct PairRecord<'a> {
    record: &'static str,
    index: usize,
    #[serde(flatten)]
    scores: &'a PairScores,
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    record: &'static str,
    pairs: usize,
    bleu2: f64,
    bleu4: f64,
    rouge2: f64,
    meteor: f64,
    avg_words: f64,
    avg_sentences: f64,
    distinct: &'a [f64],
    ttr1: f64,
    ttr2: f64,
    uncommon: &'a [(usize, f64)],
}

/// Word frequencies over every token stream of the training pairs,
/// matching what the generator's vocabulary was built from.
fn train_word_counts(pairs: &[TrainingPair]) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for pair in pairs {
        let words = pair
            .statement
            .iter()
            .chain(&pair.passages)
            .chain(pair.argument.iter().flatten());
        for w in words {
            *counts.entry(w.clone()).or_insert(0) += 1;
        }
    }
    counts.into_iter().collect()
}

/// Scores line-aligned hypothesis/reference files. The output is one JSON
/// line per pair plus a summary line; a rendered table lands next to it
/// as `<output>.table.txt` and on stdout.
pub fn evaluate(config: &PipelineConfig, args: &EvaluateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("evaluate", config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.refs)?;
    if let Some(p) = &args.train {
        manifest.record_input(p)?;
    }
    let mut timer = Timer::start();

    let hyps = jsonl::read_token_lines(&args.input)?;
    let refs = jsonl::read_token_lines(&args.refs)?;
    let train_vocab = match &args.train {
        Some(p) => train_word_counts(&read_pairs(p)?),
        None => Vec::new(),
    };
    timer.lap(&mut manifest, "read");

    let report = evaluate_corpus(&hyps, &refs, &train_vocab)?;
    timer.lap(&mut manifest, "score");

    let mut bytes = Vec::new();
    for (index, scores) in report.pairs.iter().enumerate() {
        let line = serde_json::to_vec(&PairRecord {
            record: "pair",
            index,
            scores,
        })
        .expect("pair record serializes");
        bytes.extend_from_slice(&line);
        bytes.push(b'\n');
    }
    let summary = serde_json::to_vec(&SummaryRecord {
        record: "summary",
        pairs: report.pairs.len(),
        bleu2: report.bleu2,
        bleu4: report.bleu4,
        rouge2: report.rouge2,
        meteor: report.meteor,
        avg_words: report.avg_words,
        avg_sentences: report.avg_sentences,
        distinct: &report.distinct,
        ttr1: report.ttr1,
        ttr2: report.ttr2,
        uncommon: &report.uncommon,
    })
    .expect("summary record serializes");
    bytes.extend_from_slice(&summary);
    bytes.push(b'\n');
    write_atomic(&args.output, &bytes)?;
    manifest.record_output(&args.output);

    let table = render_table(&report);
    let table_path = suffixed(&args.output, "table.txt");
    write_atomic(&table_path, table.as_bytes())?;
    manifest.record_output(&table_path);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    print!("{table}");
    println!(
        "distinct 1-4: {}; ttr-1 {:.3}, ttr-2 {:.3}",
        report
            .distinct
            .iter()
            .map(|d| format!("{d:.1}"))
            .collect::<Vec<_>>()
            .join(" / "),
        report.ttr1,
        report.ttr2
    );
    Ok(())
}

//! Model-side subcommands: train, generate, gradcheck.

use std::collections::BTreeSet;
use std::io::BufReader;

use candela_core::config::PipelineConfig;
use candela_core::corpus::Index;
use candela_core::dataprep::{read_pairs, FunctionLabel, PairAssembler};
use candela_nn::beam::{self, GenConfig};
use candela_nn::gradcheck::{grad_check, GradCheckConfig};
use candela_nn::model::{ArgModel, EncodedPair, ModelDims};
use candela_nn::train::{self as nn_train, TrainConfig};
use candela_nn::vocab::Vocab;
use serde::Serialize;

use crate::analysis;
use crate::errors::{self, CliError, Result};
use crate::jsonl;
use crate::manifest::{suffixed, write_atomic, RunManifest, Timer};
use crate::resources::Resources;
use crate::{GenerateArgs, GradcheckArgs, InOutArgs};

/// The two decoder stacks of the architecture; not configurable.
const DECODER_LAYERS: usize = 2;
/// Repeated n-grams of this size are blocked during decoding.
const BLOCK_NGRAM: usize = 4;
/// Seeds checked by the gradcheck subcommand.
const GRADCHECK_SEEDS: u64 = 5;

/// Every tenth pair is held out for validation (at least one); very small
/// sets validate on the training pairs themselves.
fn split_pairs(encoded: Vec<EncodedPair>) -> (Vec<EncodedPair>, Vec<EncodedPair>) {
    if encoded.len() < 5 {
        let val = encoded.clone();
        return (encoded, val);
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (i, pair) in encoded.into_iter().enumerate() {
        if i % 10 == 0 {
            val.push(pair);
        } else {
            train.push(pair);
        }
    }
    (train, val)
}

/// Trains on prepared pairs and writes the best-validation checkpoint,
/// plus per-epoch metrics as `<output>.metrics.jsonl`.
pub fn train(config: &PipelineConfig, args: &InOutArgs) -> Result<()> {
    let mut manifest = RunManifest::new("train", config);
    manifest.record_input(&args.input)?;
    let mut timer = Timer::start();

    let pairs = read_pairs(&args.input)?;
    let vocab = Vocab::build(&pairs, config.vocab_size)?;
    let encoded: Vec<EncodedPair> = pairs
        .iter()
        .map(|p| EncodedPair::from_pair(&vocab, p))
        .collect::<candela_core::Result<_>>()?;
    let (train_set, val_set) = split_pairs(encoded);
    timer.lap(&mut manifest, "encode");

    let dims = ModelDims {
        embed: config.embed_size,
        hidden: config.hidden_size,
        layers: DECODER_LAYERS,
        dropout: config.dropout,
    };
    let mut model = ArgModel::new(vocab, dims, config.stage_seed("model"));
    let train_cfg = TrainConfig {
        lr: config.learning_rate,
        accumulator_init: config.accumulator_init,
        clip_norm: config.clip_norm,
        batch_size: config.batch_size,
        max_epochs: config.epochs,
        patience: config.patience,
        seed: config.stage_seed("train"),
    };

    let mut metric_lines: Vec<String> = Vec::new();
    let outcome = nn_train::train(&mut model, &train_set, &val_set, &train_cfg, |m| {
        println!(
            "epoch {:>3}: loss {:.4} (word {:.4} function {:.4} selection {:.4}) val ppl {:.3} [{:.1}s]",
            m.epoch, m.train_total, m.train_arg, m.train_func, m.train_sel, m.val_perplexity,
            m.seconds
        );
        metric_lines.push(serde_json::to_string(m).expect("epoch metrics serialize"));
    })
    .map_err(errors::internal)?;
    timer.lap(&mut manifest, "train");

    let mut bytes = Vec::new();
    model.save(&mut bytes).map_err(errors::internal)?;
    write_atomic(&args.output, &bytes)?;
    manifest.record_output(&args.output);

    let metrics_path = suffixed(&args.output, "metrics.jsonl");
    let mut metrics_text = metric_lines.join("\n");
    metrics_text.push('\n');
    write_atomic(&metrics_path, metrics_text.as_bytes())?;
    manifest.record_output(&metrics_path);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "train: {} train / {} validation pairs, best epoch {} (val perplexity {:.3}){}",
        train_set.len(),
        val_set.len(),
        outcome.best_epoch,
        outcome.best_perplexity,
        if outcome.stopped_early {
            ", stopped early"
        } else {
            ""
        }
    );
    Ok(())
}

#[derive(Serialize)]
struct PlanRecord {
    keyphrases: Vec<String>,
    label: FunctionLabel,
}

#[derive(Serialize)]
struct GenerationRecord {
    statement: String,
    text: String,
    tokens: Vec<String>,
    sentences: Vec<PlanRecord>,
    memory_size: usize,
    planned: usize,
    covered: usize,
    logprob: f64,
    greedy_fallback: bool,
}

/// Full inference chain: retrieve, rank, build the keyphrase memory, and
/// beam-search a counter-argument with the given checkpoint.
pub fn generate(config: &PipelineConfig, args: &GenerateArgs) -> Result<()> {
    let mut config = config.clone();
    if let Some(b) = args.beam {
        config.beam_width = b;
    }
    if let Some(t) = args.max_tokens {
        config.max_decode_tokens = t;
    }
    if let Some(k) = args.topk {
        config.retrieval_topk = k;
    }
    config.validate()?;

    let mut manifest = RunManifest::new("generate", &config);
    manifest.record_input(&args.input)?;
    manifest.record_input(&args.index)?;
    manifest.record_input(&args.checkpoint)?;
    let mut timer = Timer::start();
    let res = Resources::load()?;

    let file = std::fs::File::open(&args.checkpoint)
        .map_err(|e| CliError::input(format!("{}: {e}", args.checkpoint.display())))?;
    let model = ArgModel::load(&mut BufReader::new(file))?;
    let index = Index::read_from(&args.index, &res.tokenizer)?;
    timer.lap(&mut manifest, "load");

    let background = analysis::background_counts(index.docs());
    let text = jsonl::read_text(&args.input)?;
    let stmt = analysis::analyze_statement(&res, &config, &text, &background)?;
    let retrieved = analysis::retrieve_merged(
        &index,
        &stmt.sentences,
        config.retrieval_topk,
        args.medium.as_deref(),
    );
    let ranked = analysis::rank_chain(&config, &stmt, retrieved);
    timer.lap(&mut manifest, "retrieve-rank");

    let assembler = PairAssembler {
        tokenizer: &res.tokenizer,
        tagger: &res.tagger,
        gazetteer: &res.gazetteer,
        vectors: &res.vectors,
        markers: &res.markers,
        config: &config,
    };
    let gin = assembler.assemble_input(&stmt.sentences, &ranked, &stmt.expanded)?;
    let mut ids = model.vocab.encode(&gin.statement);
    ids.push(model.vocab.sep());
    ids.extend(model.vocab.encode(&gin.passages));
    let memory = analysis::build_memory(&res, &gin.memory);
    timer.lap(&mut manifest, "assemble");

    let gen_cfg = GenConfig {
        beam_width: config.beam_width,
        max_tokens: config.max_decode_tokens,
        max_sentences: config.max_sentences,
        block_ngram: BLOCK_NGRAM,
    };
    let argument = beam::generate(&model, &ids, &memory, &gen_cfg).map_err(errors::internal)?;
    timer.lap(&mut manifest, "decode");

    let planned: BTreeSet<usize> = argument
        .sentences
        .iter()
        .flat_map(|p| p.chosen.iter().copied())
        .collect();
    let record = GenerationRecord {
        statement: text.trim().to_string(),
        text: argument.text(),
        tokens: argument.tokens.clone(),
        sentences: argument
            .sentences
            .iter()
            .map(|p| PlanRecord {
                keyphrases: p.chosen.iter().map(|&i| gin.memory[i].surface.clone()).collect(),
                label: p.label,
            })
            .collect(),
        memory_size: gin.memory.len(),
        planned: planned.len(),
        covered: argument.covered,
        logprob: argument.logprob,
        greedy_fallback: argument.greedy_fallback,
    };
    let mut bytes = serde_json::to_vec_pretty(&record)
        .map_err(|e| CliError::internal(format!("serializing generation: {e}")))?;
    bytes.push(b'\n');
    write_atomic(&args.output, &bytes)?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    println!(
        "generate: {} tokens in {} sentences, covered {}/{} planned keyphrases",
        record.tokens.len(),
        record.sentences.len(),
        record.covered,
        record.planned
    );
    Ok(())
}

/// Checks analytic gradients against central finite differences for a few
/// derived seeds; any mismatch is an internal failure (exit 2).
pub fn gradcheck(config: &PipelineConfig, args: &GradcheckArgs) -> Result<()> {
    let mut manifest = RunManifest::new("gradcheck", config);
    let mut timer = Timer::start();
    let check_cfg = GradCheckConfig::default();
    let base = config.stage_seed("gradcheck");

    let mut lines = Vec::new();
    let mut all_pass = true;
    let mut worst = 0.0f64;
    for i in 0..GRADCHECK_SEEDS {
        let seed = base.wrapping_add(i);
        let report = grad_check(seed, &check_cfg).map_err(errors::internal)?;
        let tensor = report
            .tensors
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
            .map(|t| t.name.clone())
            .unwrap_or_default();
        lines.push(format!(
            "seed {seed}: max rel err {:.3e} ({tensor}) {}",
            report.max_rel_err,
            if report.passed { "ok" } else { "FAIL" }
        ));
        all_pass &= report.passed;
        worst = worst.max(report.max_rel_err);
        timer.lap(&mut manifest, &format!("seed-{i}"));
    }
    lines.push(format!(
        "gradcheck: {} (worst {:.3e}, tolerance {:.1e})",
        if all_pass { "PASS" } else { "FAIL" },
        worst,
        check_cfg.rel_tol
    ));

    let mut text = lines.join("\n");
    text.push('\n');
    print!("{text}");
    write_atomic(&args.output, text.as_bytes())?;
    manifest.record_output(&args.output);
    timer.lap(&mut manifest, "write");
    manifest.write_next_to(&args.output)?;

    if !all_pass {
        return Err(CliError::internal(format!(
            "gradient check failed (max rel err {worst:.3e})"
        )));
    }
    Ok(())
}

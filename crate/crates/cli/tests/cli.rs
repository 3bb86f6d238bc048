//! Black-box tests of the `candela` binary: exit codes, run manifests,
//! determinism, and the full stage chain over the synthetic corpus.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use candela_core::corpus::{Article, Passage, ScoredPassage};
use candela_core::dataprep::read_pairs;
use candela_core::ranker::RankedPassage;
use candela_core::synth::{records_to_jsonl, synth_debate, synth_records};
use candela_core::textproc::Keyphrase;
use serde_json::Value;
use tempfile::TempDir;

/// Configuration for the chain tests: a tiny model, length gates sized
/// for the synthetic articles (5 to 9 sentences each), and signature and
/// stance thresholds scaled to one-sentence statements whose topic words
/// saturate the corpus (the defaults assume long statements against a
/// broad background).
const TEST_CONFIG: &str = "\
seed = 13
min_article_words = 30
min_passage_words = 15
retrieval_topk = 8
final_passages = 5
llr_threshold = 0.5
stance_threshold = 0.2
vocab_size = 300
embed_size = 10
hidden_size = 12
learning_rate = 0.3
batch_size = 4
epochs = 3
patience = 5
beam_width = 3
max_sentences = 3
max_decode_tokens = 24
";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn candela(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_candela"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn candela_ok(args: &[&str]) -> Run {
    let run = candela(args);
    assert_eq!(
        run.code, 0,
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        run.stdout, run.stderr
    );
    run
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path()
        .join(name)
        .to_str()
        .expect("utf-8 path")
        .to_string()
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &str) -> Vec<T> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {path}: {e}"))
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("line parses"))
        .collect()
}

/// Writes the shared config plus raw records, then chains
/// ingest -> segment -> index. Returns the config and index paths.
fn build_corpus(dir: &TempDir, records: usize) -> (String, String) {
    let config = path_str(dir, "config.txt");
    fs::write(&config, TEST_CONFIG).unwrap();
    let raw = path_str(dir, "records.jsonl");
    fs::write(&raw, records_to_jsonl(&synth_records(11, records))).unwrap();
    let articles = path_str(dir, "articles.jsonl");
    let passages = path_str(dir, "passages.jsonl");
    let index = path_str(dir, "index.bin");
    candela_ok(&[
        "--config", &config, "ingest", "--input", &raw, "--output", &articles,
    ]);
    candela_ok(&[
        "--config", &config, "segment", "--input", &articles, "--output", &passages,
    ]);
    candela_ok(&[
        "--config", &config, "index", "--input", &passages, "--output", &index,
    ]);
    (config, index)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(candela(&["--help"]).code, 0);
    assert_eq!(candela(&["--version"]).code, 0);
    assert_eq!(candela(&["retrieve", "--help"]).code, 0);
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(candela(&[]).code, 64);
    assert_eq!(candela(&["--bogus"]).code, 64);
    assert_eq!(candela(&["frobnicate"]).code, 64);
    let missing_output = candela(&["ingest", "--input", "x.jsonl"]);
    assert_eq!(missing_output.code, 64);
    assert!(
        missing_output.stderr.contains("--output"),
        "stderr: {}",
        missing_output.stderr
    );
}

#[test]
fn missing_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "articles.jsonl");
    let run = candela(&[
        "ingest",
        "--input",
        "/nonexistent/records.jsonl",
        "--output",
        &out,
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.starts_with("candela:"), "stderr: {}", run.stderr);
}

#[test]
fn invalid_config_exits_one() {
    let dir = TempDir::new().unwrap();
    let config = path_str(&dir, "config.txt");
    let out = path_str(&dir, "articles.jsonl");

    fs::write(&config, "frobnication_level = 9\n").unwrap();
    let unknown = candela(&[
        "--config", &config, "ingest", "--input", &config, "--output", &out,
    ]);
    assert_eq!(unknown.code, 1);
    assert!(
        unknown.stderr.contains("frobnication_level"),
        "stderr: {}",
        unknown.stderr
    );

    fs::write(&config, "hidden_size = 0\n").unwrap();
    let zero = candela(&[
        "--config", &config, "ingest", "--input", &config, "--output", &out,
    ]);
    assert_eq!(zero.code, 1);
}

#[test]
fn corpus_chain_writes_artifacts_and_manifests() {
    let dir = TempDir::new().unwrap();
    let (_config, index) = build_corpus(&dir, 80);

    let articles: Vec<Article> = read_jsonl(&path_str(&dir, "articles.jsonl"));
    let passages: Vec<Passage> = read_jsonl(&path_str(&dir, "passages.jsonl"));
    assert_eq!(articles.len(), 80);
    assert!(passages.len() > articles.len());
    assert!(fs::metadata(&index).unwrap().len() > 0);

    for name in [
        "articles.jsonl.manifest.json",
        "passages.jsonl.manifest.json",
        "index.bin.manifest.json",
    ] {
        let text = fs::read_to_string(path_str(&dir, name)).expect("manifest exists");
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["artifact_version"], 1);
        assert_eq!(doc["seed"], 13);
        assert!(doc["config"]["bm25_k1"].is_string());
        let digest = doc["inputs"][0]["sha256"].as_str().unwrap();
        assert_eq!(digest.len(), 64);
        assert!(doc["timings"].as_array().is_some_and(|t| !t.is_empty()));
    }

    // Atomic writes leave no staging files behind.
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty(), "staging files left: {leftovers:?}");
}

#[test]
fn retrieval_chain_ranks_and_extracts_keyphrases() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 120);
    let statement = path_str(&dir, "statement.txt");
    fs::write(&statement, synth_debate(3).0).unwrap();
    let retrieved = path_str(&dir, "retrieved.jsonl");
    let ranked = path_str(&dir, "ranked.jsonl");
    let phrases = path_str(&dir, "keyphrases.jsonl");

    candela_ok(&[
        "--config", &config, "retrieve", "--input", &statement, "--index", &index,
        "--output", &retrieved,
    ]);
    let hits: Vec<ScoredPassage> = read_jsonl(&retrieved);
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|h| h.score.is_finite() && h.score > 0.0));
    let ids: BTreeSet<String> = hits.iter().map(|h| h.passage.id()).collect();
    assert_eq!(ids.len(), hits.len(), "merge left duplicate passages");

    candela_ok(&[
        "--config", &config, "rank", "--input", &retrieved, "--statement", &statement,
        "--index", &index, "--output", &ranked,
    ]);
    let kept: Vec<RankedPassage> = read_jsonl(&ranked);
    assert!(!kept.is_empty(), "ranking filtered out every passage");
    assert!(kept.len() <= 5);
    // The stance stage fills the field; after filtering it is never zero.
    assert!(kept.iter().all(|r| r.stance != 0.0));

    candela_ok(&[
        "--config", &config, "keyphrases", "--input", &ranked, "--statement", &statement,
        "--index", &index, "--output", &phrases,
    ]);
    let found: Vec<Keyphrase> = read_jsonl(&phrases);
    assert!(!found.is_empty(), "no keyphrases from ranked passages");
    let mut seen = BTreeSet::new();
    for kp in &found {
        assert!(seen.insert(kp.words.clone()), "duplicate keyphrase {:?}", kp.words);
    }
}

#[test]
fn topk_flag_caps_per_query_results() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 60);
    let statement = path_str(&dir, "statement.txt");
    fs::write(&statement, synth_debate(3).0).unwrap();
    let wide = path_str(&dir, "wide.jsonl");
    let narrow = path_str(&dir, "narrow.jsonl");

    candela_ok(&[
        "--config", &config, "retrieve", "--input", &statement, "--index", &index,
        "--output", &wide,
    ]);
    candela_ok(&[
        "--config", &config, "retrieve", "--input", &statement, "--index", &index,
        "--output", &narrow, "--topk", "2",
    ]);
    let wide_hits: Vec<ScoredPassage> = read_jsonl(&wide);
    let narrow_hits: Vec<ScoredPassage> = read_jsonl(&narrow);
    assert!(narrow_hits.len() < wide_hits.len());
}

#[test]
fn medium_flag_restricts_retrieval() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 60);
    let statement = path_str(&dir, "statement.txt");
    fs::write(&statement, synth_debate(3).0).unwrap();
    let out = path_str(&dir, "news.jsonl");
    candela_ok(&[
        "--config", &config, "retrieve", "--input", &statement, "--index", &index,
        "--output", &out, "--medium", "news",
    ]);
    let hits: Vec<ScoredPassage> = read_jsonl(&out);
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|h| h.passage.medium == "news"));
}

#[test]
fn oracle_rank_orders_by_gold_overlap() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 120);
    let (statement_text, argument_text) = synth_debate(3);
    let statement = path_str(&dir, "statement.txt");
    let gold = path_str(&dir, "gold.txt");
    fs::write(&statement, statement_text).unwrap();
    fs::write(&gold, argument_text).unwrap();
    let retrieved = path_str(&dir, "retrieved.jsonl");
    let ranked = path_str(&dir, "oracle-ranked.jsonl");

    candela_ok(&[
        "--config", &config, "retrieve", "--input", &statement, "--index", &index,
        "--output", &retrieved,
    ]);
    candela_ok(&[
        "--config", &config, "rank", "--input", &retrieved, "--statement", &statement,
        "--index", &index, "--oracle", &gold, "--output", &ranked,
    ]);
    let kept: Vec<RankedPassage> = read_jsonl(&ranked);
    assert!(!kept.is_empty(), "oracle reranking kept no passages");
    assert!(kept.len() <= 5);
    // The gold argument is negative, so surviving passages match its sign.
    assert!(kept.iter().all(|r| r.stance < 0.0));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 60);
    let statement = path_str(&dir, "statement.txt");
    fs::write(&statement, synth_debate(5).0).unwrap();

    let first = path_str(&dir, "a.jsonl");
    let second = path_str(&dir, "b.jsonl");
    for out in [&first, &second] {
        candela_ok(&[
            "--config", &config, "retrieve", "--input", &statement, "--index", &index,
            "--output", out,
        ]);
    }
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let again = path_str(&dir, "index2.bin");
    candela_ok(&[
        "--config", &config, "index", "--input", &path_str(&dir, "passages.jsonl"),
        "--output", &again,
    ]);
    assert_eq!(fs::read(&index).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn seed_flag_overrides_config_file() {
    let dir = TempDir::new().unwrap();
    let config = path_str(&dir, "config.txt");
    fs::write(&config, TEST_CONFIG).unwrap();
    let raw = path_str(&dir, "records.jsonl");
    fs::write(&raw, records_to_jsonl(&synth_records(2, 10))).unwrap();
    let out = path_str(&dir, "articles.jsonl");
    candela_ok(&[
        "--config", &config, "--seed", "99", "ingest", "--input", &raw, "--output", &out,
    ]);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(path_str(&dir, "articles.jsonl.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["config"]["seed"], "99");
}

#[test]
fn prep_train_generate_round_trip() {
    let dir = TempDir::new().unwrap();
    let (config, index) = build_corpus(&dir, 120);

    let debates = path_str(&dir, "debates.jsonl");
    let mut lines = String::new();
    for seed in 0..6u64 {
        let (statement, argument) = synth_debate(seed);
        lines.push_str(
            &serde_json::json!({ "statement": statement, "argument": argument }).to_string(),
        );
        lines.push('\n');
    }
    fs::write(&debates, lines).unwrap();

    let pairs = path_str(&dir, "pairs.jsonl");
    let prep = candela_ok(&[
        "--config", &config, "prep", "--input", &debates, "--index", &index,
        "--output", &pairs,
    ]);
    assert!(prep.stdout.starts_with("prep:"), "stdout: {}", prep.stdout);
    let built = read_pairs(Path::new(&pairs)).unwrap();
    assert!(!built.is_empty());
    for pair in &built {
        assert_eq!(pair.labels.len(), pair.argument.len());
        assert_eq!(pair.selection.len(), pair.argument.len());
    }

    let model = path_str(&dir, "model.bin");
    let train = candela_ok(&["--config", &config, "train", "--input", &pairs, "--output", &model]);
    assert!(train.stdout.contains("best epoch"), "stdout: {}", train.stdout);
    let metrics = fs::read_to_string(path_str(&dir, "model.bin.metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 3, "one metrics line per epoch");

    let statement = path_str(&dir, "statement.txt");
    fs::write(&statement, synth_debate(40).0).unwrap();
    let first = path_str(&dir, "argument.json");
    let second = path_str(&dir, "argument2.json");
    for out in [&first, &second] {
        candela_ok(&[
            "--config", &config, "generate", "--input", &statement, "--index", &index,
            "--checkpoint", &model, "--output", out, "--beam", "2", "--max-tokens", "16",
        ]);
    }
    let doc: Value = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    assert!(doc["text"].is_string());
    assert!(doc["tokens"].is_array());
    assert!(doc["logprob"].is_number());
    assert!(doc["sentences"].is_array());
    assert_eq!(
        fs::read(&first).unwrap(),
        fs::read(&second).unwrap(),
        "generation must be deterministic"
    );
}

#[test]
fn evaluate_scores_identity_at_one() {
    let dir = TempDir::new().unwrap();
    let hyp = path_str(&dir, "hyp.txt");
    let refs = path_str(&dir, "ref.txt");
    let out = path_str(&dir, "eval.jsonl");
    let text = "the penalty is cruel and the courts know it .\n\
                the evidence shows the sentence fails .\n";
    fs::write(&hyp, text).unwrap();
    fs::write(&refs, text).unwrap();

    let run = candela_ok(&["evaluate", "--input", &hyp, "--refs", &refs, "--output", &out]);
    assert!(run.stdout.contains("B-2"), "stdout: {}", run.stdout);

    let lines: Vec<Value> = read_jsonl(&out);
    let summary = lines
        .iter()
        .find(|v| v["record"] == "summary")
        .expect("summary record");
    assert!((summary["bleu2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((summary["rouge2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(summary["pairs"], 2);
    assert!(fs::read_to_string(path_str(&dir, "eval.jsonl.table.txt"))
        .unwrap()
        .contains("METEOR"));
}

#[test]
fn evaluate_rejects_mismatched_line_counts() {
    let dir = TempDir::new().unwrap();
    let hyp = path_str(&dir, "hyp.txt");
    let refs = path_str(&dir, "ref.txt");
    let out = path_str(&dir, "eval.jsonl");
    fs::write(&hyp, "one line here .\n").unwrap();
    fs::write(&refs, "first line .\nsecond line .\n").unwrap();
    let run = candela(&["evaluate", "--input", &hyp, "--refs", &refs, "--output", &out]);
    assert_eq!(run.code, 1);
}

#[test]
fn gradcheck_command_reports_pass() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "gradcheck.txt");
    let run = candela_ok(&["gradcheck", "--output", &out]);
    assert!(
        run.stdout.contains("gradcheck: PASS"),
        "stdout: {}",
        run.stdout
    );
    let report = fs::read_to_string(&out).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("seed ")).count(), 5);
}

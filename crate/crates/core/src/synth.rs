//! Seeded synthetic fixtures: debate-style articles, statements, and small
//! training pairs. Tests and the end-to-end harness share these so every
//! stage sees the same vocabulary.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::RawRecord;
use crate::dataprep::{FunctionLabel, MemoryEntry, TrainingPair};

/// Content vocabulary shared by statements, articles, and gold arguments.
pub const TOPIC_WORDS: [&str; 24] = [
    "penalty",
    "punishment",
    "crime",
    "deterrent",
    "justice",
    "courts",
    "prison",
    "sentence",
    "execution",
    "evidence",
    "murder",
    "appeal",
    "conviction",
    "reform",
    "society",
    "victims",
    "offenders",
    "legality",
    "policy",
    "violence",
    "jury",
    "trial",
    "error",
    "costs",
];

/// Filler words drawn between topic words; mostly stopwords so content
/// density stays plausible.
const GLUE_WORDS: [&str; 16] = [
    "the", "a", "of", "in", "that", "with", "for", "on", "is", "are", "was", "has", "have", "and",
    "but", "this",
];

/// Words carrying polarity in the builtin sentiment lexicon.
const NEGATIVE_WORDS: [&str; 6] = ["cruel", "unjust", "flawed", "harmful", "wrong", "barbaric"];
const POSITIVE_WORDS: [&str; 6] = ["effective", "fair", "humane", "sound", "right", "beneficial"];

fn pick<'a, R: Rng>(rng: &mut R, words: &'a [&'a str]) -> &'a str {
    words.choose(rng).expect("nonempty word bank")
}

fn sentence<R: Rng>(rng: &mut R, words: usize, polarity: i8) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(words);
    for i in 0..words {
        let word = if i % 3 == 2 {
            pick(rng, &TOPIC_WORDS)
        } else if polarity != 0 && i % 5 == 1 {
            if polarity > 0 {
                pick(rng, &POSITIVE_WORDS)
            } else {
                pick(rng, &NEGATIVE_WORDS)
            }
        } else {
            pick(rng, &GLUE_WORDS)
        };
        parts.push(word.to_string());
    }
    if let Some(first) = parts.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            *first = c.to_uppercase().collect::<String>() + chars.as_str();
        }
    }
    format!("{}.", parts.join(" "))
}

/// Articles long enough to pass the ingest length gate, alternating media,
/// with a sprinkling of sentiment so stance scoring has signal. Each
/// article leans one way but individual sentences sometimes dissent, the
/// way quoted rebuttals do, so passages carry mixed stance signs.
pub fn synth_records(seed: u64, n: usize) -> Vec<RawRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for idx in 0..n {
        let sentences = rng.gen_range(5..=9);
        let lean = match idx % 3 {
            0 => -1,
            1 => 1,
            _ => 0,
        };
        let text: Vec<String> = (0..sentences)
            .map(|_| {
                let words = rng.gen_range(9..=15);
                let polarity = if lean != 0 && rng.gen_bool(0.3) {
                    -lean
                } else {
                    lean
                };
                sentence(&mut rng, words, polarity)
            })
            .collect();
        records.push(RawRecord {
            id: Some(format!("synth-{idx:04}")),
            medium: if idx % 2 == 0 { "news" } else { "debate" }.to_string(),
            date: Some(format!("2016-{:02}-{:02}", 1 + idx % 12, 1 + idx % 28)),
            text: text.join(" "),
        });
    }
    records
}

/// One statement and one gold reply over the shared vocabulary. The
/// statement leads with bare nouns so its keyphrases come out as plain
/// topic words that actually recur in the articles.
pub fn synth_debate(seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lead = pick(&mut rng, &TOPIC_WORDS[..4]);
    let mut lead_cap = String::new();
    let mut chars = lead.chars();
    if let Some(c) = chars.next() {
        lead_cap.extend(c.to_uppercase());
        lead_cap.push_str(chars.as_str());
    }
    let statement = format!(
        "{lead_cap} is an effective deterrent and courts should keep the {} for every {}.",
        pick(&mut rng, &["penalty", "punishment", "sentence"]),
        pick(&mut rng, &["crime", "murder", "conviction"])
    );
    let argument = format!(
        "The {} is cruel and the evidence shows no deterrent effect on {}. \
         Courts have sentenced the wrong people and an execution cannot be undone. \
         It costs society more than prison and the {} stays flawed.",
        pick(&mut rng, &["penalty", "punishment"]),
        pick(&mut rng, &["crime", "violence", "murder"]),
        pick(&mut rng, &["policy", "sentence", "trial"])
    );
    (statement, argument)
}

/// Serializes records as the line-delimited ingest format.
pub fn records_to_jsonl(records: &[RawRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes"))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Tiny-vocabulary training pairs for optimizer and decoder tests. Each
/// argument restates the statement's content words in reverse with a fixed
/// frame, so a small model can memorize the mapping.
pub fn synth_pairs(seed: u64, n: usize) -> Vec<TrainingPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let content: Vec<&str> = TOPIC_WORDS[..8].to_vec();
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let a = pick(&mut rng, &content).to_string();
        let b = loop {
            let w = pick(&mut rng, &content).to_string();
            if w != a {
                break w;
            }
        };
        let statement: Vec<String> = ["the", a.as_str(), "needs", b.as_str(), "."]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let passages: Vec<String> = ["they", "say", a.as_str(), "and", b.as_str(), "matter", "."]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let memory = vec![
            MemoryEntry {
                words: vec![a.clone()],
                surface: a.clone(),
            },
            MemoryEntry {
                words: vec![b.clone()],
                surface: b.clone(),
            },
        ];
        let argument = vec![
            vec!["no".to_string(), ",".to_string(), b.clone(), ".".to_string()],
            vec![
                "the".to_string(),
                a.clone(),
                "is".to_string(),
                "wrong".to_string(),
                ".".to_string(),
            ],
        ];
        // One bitmap per argument sentence; the first is all-false because
        // step zero consumes the start marker. Sentence 1 mentions word a,
        // memory index 0.
        let selection = vec![vec![false, false], vec![true, false]];
        pairs.push(TrainingPair {
            statement,
            passages,
            memory,
            argument,
            labels: vec![FunctionLabel::Content, FunctionLabel::Content],
            selection,
        });
    }
    pairs
}

//! Automatic metrics for generated arguments: BLEU, ROUGE-2 recall,
//! METEOR-lite, diversity statistics, and a paired randomization test.

mod bleu;
mod diversity;
mod meteor;
mod rouge;
mod signif;

pub use bleu::bleu;
pub use diversity::{distinct_n, top_k_words, ttr_n, uncommon_fraction};
pub use meteor::{meteor_lite, stem};
pub use rouge::rouge2_recall;
pub use signif::{paired_randomization, DEFAULT_PERMUTATIONS};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Sentence separator token used when counting sentences in token streams.
pub const SENTENCE_SEP: &str = "</s>";

/// K values reported for the uncommon-word fraction.
pub const UNCOMMON_KS: [usize; 4] = [100, 500, 1000, 2000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub bleu2: f64,
    pub bleu4: f64,
    pub rouge2: f64,
    pub meteor: f64,
    pub words: usize,
    pub sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: Vec<PairScores>,
    pub bleu2: f64,
    pub bleu4: f64,
    pub rouge2: f64,
    pub meteor: f64,
    pub avg_words: f64,
    pub avg_sentences: f64,
    /// Average distinct n-grams per argument, for n = 1..=4.
    pub distinct: Vec<f64>,
    pub ttr1: f64,
    pub ttr2: f64,
    /// (K, fraction of tokens outside the top-K training vocabulary).
    pub uncommon: Vec<(usize, f64)>,
}

fn is_word_token(token: &str) -> bool {
    token.chars().any(|c| c.is_alphanumeric())
}

fn count_words(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| is_word_token(t)).count()
}

fn count_sentences(tokens: &[String]) -> usize {
    if tokens.is_empty() {
        return 0;
    }
    tokens
        .split(|t| t == SENTENCE_SEP)
        .filter(|seg| !seg.is_empty())
        .count()
}

/// Scores a corpus of hypothesis/reference pairs. Corpus BLEU and ROUGE are
/// computed over all pairs; per-pair values use the same definitions on a
/// single pair. `train_vocab` supplies (word, frequency) counts for the
/// uncommon-word fractions; pass an empty slice to skip them.
pub fn evaluate_corpus(
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
    train_vocab: &[(String, u64)],
) -> Result<EvalReport> {
    if hyps.len() != refs.len() {
        return Err(crate::error::CoreError::invalid(format!(
            "hypothesis/reference count mismatch: {} vs {}",
            hyps.len(),
            refs.len()
        )));
    }
    let ref_sets: Vec<Vec<Vec<String>>> = refs.iter().map(|r| vec![r.clone()]).collect();

    let mut pairs = Vec::with_capacity(hyps.len());
    for (hyp, r) in hyps.iter().zip(refs) {
        let single_refs = vec![vec![r.clone()]];
        pairs.push(PairScores {
            bleu2: bleu(std::slice::from_ref(hyp), &single_refs, 2)?,
            bleu4: bleu(std::slice::from_ref(hyp), &single_refs, 4)?,
            rouge2: rouge2_recall(hyp, r)?,
            meteor: meteor_lite(hyp, r)?,
            words: count_words(hyp),
            sentences: count_sentences(hyp),
        });
    }

    let n_pairs = hyps.len().max(1) as f64;
    let mean = |f: &dyn Fn(&PairScores) -> f64| pairs.iter().map(f).sum::<f64>() / n_pairs;

    let distinct = (1..=4).map(|n| distinct_n(hyps, n)).collect();
    let uncommon = UNCOMMON_KS
        .iter()
        .map(|&k| (k, uncommon_fraction(hyps, train_vocab, k)))
        .collect();

    Ok(EvalReport {
        bleu2: bleu(hyps, &ref_sets, 2)?,
        bleu4: bleu(hyps, &ref_sets, 4)?,
        rouge2: mean(&|p: &PairScores| p.rouge2),
        meteor: mean(&|p: &PairScores| p.meteor),
        avg_words: mean(&|p: &PairScores| p.words as f64),
        avg_sentences: mean(&|p: &PairScores| p.sentences as f64),
        distinct,
        ttr1: ttr_n(hyps, 1),
        ttr2: ttr_n(hyps, 2),
        uncommon,
        pairs,
    })
}

/// Plain-text summary table with one value row.
pub fn render_table(report: &EvalReport) -> String {
    let header = format!(
        "{:>8} {:>6} {:>7} {:>7} {:>7} {:>7}",
        "#Word", "#Sent", "B-2", "B-4", "R-2", "METEOR"
    );
    let row = format!(
        "{:>8.1} {:>6.1} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
        report.avg_words,
        report.avg_sentences,
        report.bleu2,
        report.bleu4,
        report.rouge2,
        report.meteor
    );
    format!("{header}\n{row}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|w| w.to_string()).collect()
    }

    #[test]
    fn identity_pair_scores_one() {
        let hyp = vec![toks("the court rejected the appeal today")];
        let report = evaluate_corpus(&hyp, &hyp, &[]).unwrap();
        assert!((report.bleu2 - 1.0).abs() < 1e-12);
        assert!((report.bleu4 - 1.0).abs() < 1e-12);
        assert!((report.rouge2 - 1.0).abs() < 1e-12);
        assert!(report.meteor > 0.99);
    }

    #[test]
    fn sentence_and_word_counts_use_separator() {
        let tokens = toks("the penalty fails . </s> it costs more .");
        assert_eq!(count_sentences(&tokens), 2);
        assert_eq!(count_words(&tokens), 7);
        assert_eq!(count_sentences(&[]), 0);
    }

    #[test]
    fn corpus_metrics_are_permutation_invariant() {
        let hyps = vec![
            toks("a b c d e"),
            toks("f g h i j"),
            toks("a b x y z"),
        ];
        let refs = vec![
            toks("a b c d"),
            toks("f g h q"),
            toks("a b x w"),
        ];
        let fwd = evaluate_corpus(&hyps, &refs, &[]).unwrap();
        let rev_h: Vec<_> = hyps.iter().rev().cloned().collect();
        let rev_r: Vec<_> = refs.iter().rev().cloned().collect();
        let rev = evaluate_corpus(&rev_h, &rev_r, &[]).unwrap();
        assert!((fwd.bleu2 - rev.bleu2).abs() < 1e-12);
        assert!((fwd.bleu4 - rev.bleu4).abs() < 1e-12);
        assert!((fwd.rouge2 - rev.rouge2).abs() < 1e-12);
        assert!((fwd.meteor - rev.meteor).abs() < 1e-12);
        assert!((fwd.ttr2 - rev.ttr2).abs() < 1e-12);
    }

    #[test]
    fn table_renders_all_columns() {
        let report = evaluate_corpus(
            &[toks("a b c")],
            &[toks("a b c")],
            &[],
        )
        .unwrap();
        let table = render_table(&report);
        for col in ["#Word", "#Sent", "B-2", "B-4", "R-2", "METEOR"] {
            assert!(table.contains(col), "missing column {col}");
        }
        assert_eq!(table.lines().count(), 2);
    }
}

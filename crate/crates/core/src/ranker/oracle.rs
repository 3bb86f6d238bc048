//! Gold-argument reranking used when constructing training data.
//!
//! Passages are sorted lexicographically on five criteria: statement
//! signature coverage; a weighted n-gram coverage of the argument
//! (0.5 / 0.3 / 0.2 for 4-, 3-, and 2-grams); stance magnitude after
//! dropping passages whose stance polarity contradicts the argument's;
//! content-word overlap with the argument; argument signature coverage.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::stance::{stance_score, StanceTargets};
use crate::corpus::ScoredPassage;
use crate::error::{CoreError, Result};
use crate::textproc::{Sentence, Token};

const NGRAM_WEIGHTS: [(usize, f64); 3] = [(4, 0.5), (3, 0.3), (2, 0.2)];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRanked {
    pub passage: ScoredPassage,
    pub stmt_signature_cover: usize,
    pub ngram_score: f64,
    pub stance: f64,
    pub arg_overlap: usize,
    pub arg_signature_cover: usize,
}

/// Distinct n-grams made of `n` adjacent content words.
fn content_ngrams(tokens: &[Token], n: usize) -> BTreeSet<Vec<&str>> {
    tokens
        .windows(n)
        .filter(|w| w.iter().all(|t| t.is_content))
        .map(|w| w.iter().map(|t| t.lower.as_str()).collect())
        .collect()
}

/// Weighted coverage of the argument's content n-grams by the passage:
/// `0.5 * frac4 + 0.3 * frac3 + 0.2 * frac2`, each fraction over the
/// argument's distinct n-gram count. Orders without any n-grams of a given
/// size contribute zero.
pub fn weighted_ngram_coverage(passage_tokens: &[Token], argument_tokens: &[Token]) -> f64 {
    let mut score = 0.0;
    for (n, weight) in NGRAM_WEIGHTS {
        let arg = content_ngrams(argument_tokens, n);
        if arg.is_empty() {
            continue;
        }
        let psg = content_ngrams(passage_tokens, n);
        let covered = arg.intersection(&psg).count();
        score += weight * covered as f64 / arg.len() as f64;
    }
    score
}

/// Reranks `passages` for training-data construction. `stmt_signatures`
/// and `arg_signatures` are lowercased topic-signature word sets;
/// `targets` drives the stance scores of both argument and passages.
pub fn oracle_rerank(
    passages: Vec<ScoredPassage>,
    gold_argument: &[Sentence],
    stmt_signatures: &BTreeSet<String>,
    arg_signatures: &BTreeSet<String>,
    targets: &StanceTargets,
) -> Result<Vec<OracleRanked>> {
    if gold_argument.iter().all(|s| s.tokens.is_empty()) {
        return Err(CoreError::invalid("gold argument is empty"));
    }
    let arg_tokens: Vec<Token> = gold_argument
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    let arg_words: BTreeSet<&str> = arg_tokens
        .iter()
        .filter(|t| t.is_content)
        .map(|t| t.lower.as_str())
        .collect();
    let arg_q = stance_score(&arg_tokens, targets);

    let mut out: Vec<OracleRanked> = passages
        .into_iter()
        .filter_map(|scored| {
            let stance = stance_score(&scored.passage.tokens, targets);
            // Same-polarity requirement, enforced only when the argument
            // itself has a polarity. f64::signum maps 0.0 to 1.0, so the
            // sign is computed explicitly.
            let sign = |x: f64| -> i8 {
                if x > 0.0 {
                    1
                } else if x < 0.0 {
                    -1
                } else {
                    0
                }
            };
            if arg_q != 0.0 && sign(stance) != sign(arg_q) {
                return None;
            }
            let psg_words: BTreeSet<&str> = scored.passage.content_words().collect();
            let stmt_signature_cover = stmt_signatures
                .iter()
                .filter(|w| psg_words.contains(w.as_str()))
                .count();
            let ngram_score = weighted_ngram_coverage(&scored.passage.tokens, &arg_tokens);
            let arg_overlap = arg_words.intersection(&psg_words).count();
            let arg_signature_cover = arg_signatures
                .iter()
                .filter(|w| psg_words.contains(w.as_str()))
                .count();
            Some(OracleRanked {
                passage: scored,
                stmt_signature_cover,
                ngram_score,
                stance,
                arg_overlap,
                arg_signature_cover,
            })
        })
        .collect();

    out.sort_by(|a, b| {
        b.stmt_signature_cover
            .cmp(&a.stmt_signature_cover)
            .then_with(|| cmp_f64_desc(a.ngram_score, b.ngram_score))
            .then_with(|| cmp_f64_desc(a.stance.abs(), b.stance.abs()))
            .then_with(|| b.arg_overlap.cmp(&a.arg_overlap))
            .then_with(|| b.arg_signature_cover.cmp(&a.arg_signature_cover))
            .then_with(|| a.passage.passage.id().cmp(&b.passage.passage.id()))
    });
    Ok(out)
}

fn cmp_f64_desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{SentimentLexicon, Tokenizer};

    fn scored(article: &str, text: &str) -> ScoredPassage {
        crate::ranker::tests::passage(article, 0, text)
    }

    fn sentences(text: &str) -> Vec<Sentence> {
        Tokenizer::builtin().split_sentences(text)
    }

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn no_stance() -> StanceTargets {
        StanceTargets::default()
    }

    #[test]
    fn empty_argument_rejected() {
        let err = oracle_rerank(vec![], &[], &set(&[]), &set(&[]), &no_stance());
        assert!(err.is_err());
    }

    #[test]
    fn statement_signature_coverage_dominates() {
        let got = oracle_rerank(
            vec![
                scored("zero", "weather report sunny skies"),
                scored("two", "penalty deters crime strongly"),
            ],
            &sentences("Unrelated argument text here."),
            &set(&["penalty", "crime"]),
            &set(&[]),
            &no_stance(),
        )
        .unwrap();
        assert_eq!(got[0].passage.passage.article_id, "two");
        assert_eq!(got[0].stmt_signature_cover, 2);
    }

    #[test]
    fn weighted_ngram_hand_value() {
        let tk = Tokenizer::builtin();
        // Argument: 5 content words in a row.
        let arg = tk.tokenize("zala bemo cura dola ensa");
        // Passage covering the last four: 1/2 of 4-grams, 2/3 of
        // trigrams, 3/4 of bigrams.
        let psg = tk.tokenize("bemo cura dola ensa");
        let got = weighted_ngram_coverage(&psg, &arg);
        let expect = 0.5 * 0.5 + 0.3 * (2.0 / 3.0) + 0.2 * 0.75;
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn ngram_runs_break_at_stopwords() {
        let tk = Tokenizer::builtin();
        // "the" interrupts the content run, so no content 4-gram or
        // 3-gram spans it.
        let arg = tk.tokenize("zala bemo the cura dola");
        let grams4 = content_ngrams(&arg, 4);
        assert!(grams4.is_empty());
        let grams2 = content_ngrams(&arg, 2);
        assert_eq!(grams2.len(), 2);
    }

    #[test]
    fn opposite_stance_passages_dropped() {
        let mut lexicon = SentimentLexicon::default();
        lexicon.insert("good", 1);
        lexicon.insert("awful", -1);
        let targets = StanceTargets::new(vec![vec!["policy".to_string()]], lexicon);
        let got = oracle_rerank(
            vec![
                scored("pro", "good policy indeed"),
                scored("con", "awful policy indeed"),
            ],
            &sentences("This is an awful policy."),
            &set(&[]),
            &set(&[]),
            &targets,
        )
        .unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].passage.passage.article_id, "con");
        assert!(got[0].stance < 0.0);
    }

    #[test]
    fn zero_argument_stance_drops_nothing() {
        let mut lexicon = SentimentLexicon::default();
        lexicon.insert("good", 1);
        let targets = StanceTargets::new(vec![vec!["policy".to_string()]], lexicon);
        let got = oracle_rerank(
            vec![scored("pro", "good policy indeed"), scored("neutral", "the policy exists")],
            &sentences("Nothing opinionated about the policy here."),
            &set(&[]),
            &set(&[]),
            &targets,
        )
        .unwrap();
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn later_criteria_break_ties_in_order() {
        // Equal signature coverage and n-gram score; argument overlap
        // should decide.
        let got = oracle_rerank(
            vec![
                scored("low", "crime statistics general words"),
                scored("high", "crime statistics deter judges"),
            ],
            &sentences("Judges deter crime."),
            &set(&["crime"]),
            &set(&[]),
            &no_stance(),
        )
        .unwrap();
        assert_eq!(got[0].passage.passage.article_id, "high");
        assert!(got[0].arg_overlap > got[1].arg_overlap);
    }

    #[test]
    fn full_ordering_matches_brute_force() {
        let arg = sentences("Strict penalty policy deters violent crime effectively.");
        let stmt_sigs = set(&["penalty", "policy"]);
        let arg_sigs = set(&["deters", "crime", "violent"]);
        let passages = vec![
            scored("p0", "penalty policy deters violent crime effectively"),
            scored("p1", "penalty policy in violent places"),
            scored("p2", "crime statistics and policy"),
            scored("p3", "deters violent crime effectively every time"),
            scored("p4", "unrelated weather words entirely"),
        ];
        let got = oracle_rerank(passages.clone(), &arg, &stmt_sigs, &arg_sigs, &no_stance())
            .unwrap();
        let arg_tokens: Vec<Token> = arg.iter().flat_map(|s| s.tokens.clone()).collect();
        let mut oracle: Vec<(Vec<i64>, String)> = passages
            .iter()
            .map(|sp| {
                let pw: BTreeSet<&str> = sp.passage.content_words().collect();
                let c1 = stmt_sigs.iter().filter(|w| pw.contains(w.as_str())).count();
                let c2 = weighted_ngram_coverage(&sp.passage.tokens, &arg_tokens);
                let aw: BTreeSet<&str> = arg_tokens
                    .iter()
                    .filter(|t| t.is_content)
                    .map(|t| t.lower.as_str())
                    .collect();
                let c4 = aw.intersection(&pw).count();
                let c5 = arg_sigs.iter().filter(|w| pw.contains(w.as_str())).count();
                let key = vec![
                    -(c1 as i64),
                    -((c2 * 1e9).round() as i64),
                    0, // stance disabled in this fixture
                    -(c4 as i64),
                    -(c5 as i64),
                ];
                (key, sp.passage.id())
            })
            .collect();
        oracle.sort();
        let got_ids: Vec<String> = got.iter().map(|r| r.passage.passage.id()).collect();
        let oracle_ids: Vec<String> = oracle.into_iter().map(|(_, id)| id).collect();
        assert_eq!(got_ids, oracle_ids);
    }
}

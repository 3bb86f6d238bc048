//! Statement-overlap ranking of retrieved passages.
//!
//! Sort key, descending and lexicographic: total distinct-word count of
//! statement keyphrases occurring verbatim in the passage, then statement
//! signature-word coverage, then shared content-word bigrams, then shared
//! content unigrams, then retrieval score; passage id ascending settles
//! everything else.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ScoredPassage;
use crate::textproc::{Keyphrase, Sentence, Token};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankKey {
    pub keyphrase_words: usize,
    pub signature_cover: usize,
    pub bigram_cover: usize,
    pub unigram_cover: usize,
    pub retrieval_score: f64,
}

impl RankKey {
    /// Descending comparison on all components (higher key sorts first).
    fn cmp_desc(&self, other: &RankKey) -> Ordering {
        other
            .keyphrase_words
            .cmp(&self.keyphrase_words)
            .then_with(|| other.signature_cover.cmp(&self.signature_cover))
            .then_with(|| other.bigram_cover.cmp(&self.bigram_cover))
            .then_with(|| other.unigram_cover.cmp(&self.unigram_cover))
            .then_with(|| {
                other
                    .retrieval_score
                    .partial_cmp(&self.retrieval_score)
                    .unwrap_or(Ordering::Equal)
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedPassage {
    pub passage: ScoredPassage,
    pub key: RankKey,
    /// Stance score; filled by the stance stage, 0 until then.
    pub stance: f64,
}

/// Adjacent token pairs where both members are content words.
pub fn content_bigrams(tokens: &[Token]) -> BTreeSet<(String, String)> {
    tokens
        .windows(2)
        .filter(|w| w[0].is_content && w[1].is_content)
        .map(|w| (w[0].lower.clone(), w[1].lower.clone()))
        .collect()
}

/// True when `words` occurs as a contiguous lowercased token run.
pub(crate) fn contains_sequence(tokens: &[Token], words: &[String]) -> bool {
    if words.is_empty() || words.len() > tokens.len() {
        return false;
    }
    tokens
        .windows(words.len())
        .any(|w| w.iter().zip(words).all(|(t, q)| t.lower == *q))
}

/// Ranks passages against the statement. `signature_words` are the
/// statement's topic-signature words, lowercased.
pub fn rank_passages(
    passages: Vec<ScoredPassage>,
    statement: &[Sentence],
    keyphrases: &[Keyphrase],
    signature_words: &BTreeSet<String>,
) -> Vec<RankedPassage> {
    let stmt_tokens: Vec<Token> = statement
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    let stmt_unigrams: BTreeSet<&str> = stmt_tokens
        .iter()
        .filter(|t| t.is_content)
        .map(|t| t.lower.as_str())
        .collect();
    let stmt_bigrams = content_bigrams(&stmt_tokens);

    let mut ranked: Vec<RankedPassage> = passages
        .into_iter()
        .map(|scored| {
            let tokens = &scored.passage.tokens;
            let keyphrase_words: usize = keyphrases
                .iter()
                .filter(|kp| contains_sequence(tokens, &kp.words))
                .map(|kp| kp.words.iter().collect::<BTreeSet<_>>().len())
                .sum();
            let psg_words: BTreeSet<&str> = scored.passage.content_words().collect();
            let signature_cover = signature_words
                .iter()
                .filter(|w| psg_words.contains(w.as_str()))
                .count();
            let psg_bigrams = content_bigrams(tokens);
            let bigram_cover = stmt_bigrams.intersection(&psg_bigrams).count();
            let unigram_cover = stmt_unigrams
                .iter()
                .filter(|w| psg_words.contains(**w))
                .count();
            let key = RankKey {
                keyphrase_words,
                signature_cover,
                bigram_cover,
                unigram_cover,
                retrieval_score: scored.score,
            };
            RankedPassage {
                passage: scored,
                key,
                stance: 0.0,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.key
            .cmp_desc(&b.key)
            .then_with(|| a.passage.passage.id().cmp(&b.passage.passage.id()))
    });
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{PhraseKind, Tokenizer};

    fn scored(article: &str, text: &str, score: f64) -> ScoredPassage {
        let mut sp = crate::ranker::tests::passage(article, 0, text);
        sp.score = score;
        sp
    }

    fn keyphrase(words: &[&str]) -> Keyphrase {
        Keyphrase {
            words: words.iter().map(|w| w.to_string()).collect(),
            surface: words.join(" "),
            kind: PhraseKind::Np,
            embedding: vec![],
        }
    }

    fn statement(text: &str) -> Vec<Sentence> {
        Tokenizer::builtin().split_sentences(text)
    }

    #[test]
    fn full_keyphrase_match_beats_partial() {
        let stmt = statement("The death penalty deters crime.");
        let kps = vec![keyphrase(&["death", "penalty"])];
        let got = rank_passages(
            vec![
                scored("partial", "the penalty for late filing", 5.0),
                scored("full", "studies on the death penalty disagree", 1.0),
            ],
            &stmt,
            &kps,
            &BTreeSet::new(),
        );
        assert_eq!(got[0].passage.passage.article_id, "full");
        assert_eq!(got[0].key.keyphrase_words, 2);
        assert_eq!(got[1].key.keyphrase_words, 0);
    }

    #[test]
    fn signature_coverage_breaks_keyphrase_ties() {
        let stmt = statement("Crime policy matters.");
        let sigs: BTreeSet<String> = ["crime", "policy", "deterrence"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let got = rank_passages(
            vec![
                scored("one", "crime statistics rose", 9.0),
                scored("three", "crime policy and deterrence studies", 1.0),
            ],
            &stmt,
            &[],
            &sigs,
        );
        assert_eq!(got[0].passage.passage.article_id, "three");
        assert_eq!(got[0].key.signature_cover, 3);
        assert_eq!(got[1].key.signature_cover, 1);
    }

    #[test]
    fn id_is_the_final_tiebreak() {
        let stmt = statement("Unrelated text entirely.");
        let got = rank_passages(
            vec![
                scored("bbb", "same words here", 1.0),
                scored("aaa", "same words here", 1.0),
            ],
            &stmt,
            &[],
            &BTreeSet::new(),
        );
        assert_eq!(got[0].passage.passage.article_id, "aaa");
    }

    #[test]
    fn matches_brute_force_comparator() {
        let stmt = statement("The death penalty deters violent crime in many states.");
        let kps = vec![keyphrase(&["death", "penalty"]), keyphrase(&["violent", "crime"])];
        let sigs: BTreeSet<String> = ["penalty", "crime", "deters", "states"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let inputs = vec![
            scored("p0", "the death penalty deters violent crime", 2.0),
            scored("p1", "violent crime rates and the penalty", 3.0),
            scored("p2", "many states report crime data", 4.0),
            scored("p3", "weather forecasts for many states", 5.0),
            scored("p4", "the death penalty in many states deters", 1.0),
        ];
        let got = rank_passages(inputs.clone(), &stmt, &kps, &sigs);

        // Oracle: score every passage independently and sort with a
        // tuple comparator.
        let mut oracle: Vec<(Vec<i64>, String)> = inputs
            .iter()
            .map(|sp| {
                let toks = &sp.passage.tokens;
                let kw: usize = kps
                    .iter()
                    .filter(|kp| {
                        (0..toks.len().saturating_sub(kp.words.len() - 1)).any(|i| {
                            toks[i..i + kp.words.len()]
                                .iter()
                                .zip(&kp.words)
                                .all(|(t, w)| &t.lower == w)
                        })
                    })
                    .map(|kp| {
                        kp.words
                            .iter()
                            .collect::<std::collections::HashSet<_>>()
                            .len()
                    })
                    .sum();
                let pw: BTreeSet<&str> = sp.passage.content_words().collect();
                let sc = sigs.iter().filter(|w| pw.contains(w.as_str())).count();
                let stoks: Vec<Token> =
                    stmt.iter().flat_map(|s| s.tokens.iter().cloned()).collect();
                let sb = content_bigrams(&stoks);
                let pb = content_bigrams(toks);
                let bc = sb.intersection(&pb).count();
                let su: BTreeSet<&str> = stoks
                    .iter()
                    .filter(|t| t.is_content)
                    .map(|t| t.lower.as_str())
                    .collect();
                let uc = su.iter().filter(|w| pw.contains(**w)).count();
                // Score scaled to integer cents to sit inside the tuple.
                let key = vec![
                    -(kw as i64),
                    -(sc as i64),
                    -(bc as i64),
                    -(uc as i64),
                    -((sp.score * 100.0).round() as i64),
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

//! Passage ranking chain: merge retrieval results, rank by statement
//! overlap, drop redundant passages, score and filter by stance, and (in
//! training mode) rerank against a gold argument.

mod oracle;
mod rank;
mod stance;

pub use oracle::{oracle_rerank, weighted_ngram_coverage, OracleRanked};
pub use rank::{content_bigrams, rank_passages, RankKey, RankedPassage};
pub use stance::{stance_filter, stance_score, StanceTargets};

use std::collections::HashSet;

use crate::corpus::ScoredPassage;

/// Merges per-query retrieval results: union by passage id, first-seen
/// score kept, first-seen order preserved.
pub fn merge_dedup(per_query: Vec<Vec<ScoredPassage>>) -> Vec<ScoredPassage> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for batch in per_query {
        for scored in batch {
            if seen.insert(scored.passage.id()) {
                out.push(scored);
            }
        }
    }
    out
}

/// Greedy redundancy filter over a ranked list: a passage is dropped iff
/// strictly more than half of its distinct content words already appear in
/// the retained higher-ranked passages.
pub fn diversity_filter(ranked: Vec<RankedPassage>) -> Vec<RankedPassage> {
    let mut covered: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for rp in ranked {
        let words: HashSet<String> = rp
            .passage
            .passage
            .content_words()
            .map(str::to_string)
            .collect();
        let overlap = words.iter().filter(|w| covered.contains(*w)).count();
        if 2 * overlap > words.len() {
            continue;
        }
        covered.extend(words);
        out.push(rp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Passage;
    use crate::textproc::Tokenizer;

    pub(crate) fn passage(article: &str, start: usize, text: &str) -> ScoredPassage {
        let tk = Tokenizer::builtin();
        let tokens = tk.tokenize(text);
        let word_count = tokens.iter().filter(|t| t.is_word()).count();
        ScoredPassage {
            passage: Passage {
                article_id: article.to_string(),
                start,
                end: start + 3,
                tokens,
                word_count,
                medium: "news".to_string(),
            },
            score: 1.0,
        }
    }

    fn ranked(article: &str, text: &str) -> RankedPassage {
        RankedPassage {
            passage: passage(article, 0, text),
            key: RankKey::default(),
            stance: 0.0,
        }
    }

    #[test]
    fn merge_keeps_first_seen_score() {
        let mut a = passage("x", 0, "death penalty words");
        a.score = 9.0;
        let mut b = passage("x", 0, "death penalty words");
        b.score = 4.0;
        let merged = merge_dedup(vec![vec![a], vec![b]]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].score, 9.0);
    }

    #[test]
    fn merge_of_disjoint_results_concatenates() {
        let merged = merge_dedup(vec![
            vec![passage("x", 0, "one two")],
            vec![passage("y", 0, "three four")],
        ]);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].passage.article_id, "x");
    }

    #[test]
    fn merge_of_empty_inputs_is_empty() {
        assert!(merge_dedup(vec![]).is_empty());
        assert!(merge_dedup(vec![vec![], vec![]]).is_empty());
    }

    #[test]
    fn diversity_drops_majority_covered() {
        // Second passage: content words {alpha, beta, gamma, delta, epsilonx};
        // three of five covered by the first.
        let first = ranked("a", "alpha beta gamma others differ");
        let second = ranked("b", "alpha beta gamma delta epsilonx");
        let got = diversity_filter(vec![first, second]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].passage.passage.article_id, "a");
    }

    #[test]
    fn diversity_keeps_exactly_half_covered() {
        let first = ranked("a", "alpha beta extra words here");
        // {alpha, beta, delta, epsilonx}: exactly 2 of 4 covered.
        let second = ranked("b", "alpha beta delta epsilonx");
        let got = diversity_filter(vec![first, second]);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn diversity_singleton_unchanged() {
        let got = diversity_filter(vec![ranked("a", "alpha beta gamma")]);
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn diversity_counts_only_retained_passages() {
        // b is dropped (covered by a); c overlaps b heavily but a only
        // slightly, so c must survive because b was not retained.
        let a = ranked("a", "alpha beta gamma other words");
        let b = ranked("b", "alpha beta gamma");
        let c = ranked("c", "beta delta epsilonx zeta");
        let got = diversity_filter(vec![a, b, c]);
        let ids: Vec<&str> = got
            .iter()
            .map(|r| r.passage.passage.article_id.as_str())
            .collect();
        assert_eq!(ids, vec!["a", "c"]);
    }

    #[test]
    fn diversity_is_prefix_stable() {
        let texts = [
            "alpha beta gamma delta words",
            "alpha beta gamma delta other",
            "epsilonx zeta eta theta words",
            "epsilonx zeta eta theta alpha",
            "iota kappa lambada mu nu",
        ];
        let full: Vec<RankedPassage> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| ranked(&format!("p{i}"), t))
            .collect();
        let full_out: Vec<String> = diversity_filter(full.clone())
            .iter()
            .map(|r| r.passage.passage.id())
            .collect();
        for k in 0..=texts.len() {
            let prefix: Vec<RankedPassage> = full[..k].to_vec();
            let got: Vec<String> = diversity_filter(prefix)
                .iter()
                .map(|r| r.passage.passage.id())
                .collect();
            let prefix_ids: Vec<String> =
                full[..k].iter().map(|r| r.passage.passage.id()).collect();
            let expect: Vec<String> = full_out
                .iter()
                .filter(|id| prefix_ids.contains(id))
                .cloned()
                .collect();
            assert_eq!(got, expect, "prefix {k}");
        }
    }
}

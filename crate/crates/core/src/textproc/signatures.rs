//! Log-likelihood-ratio topic signatures.
//!
//! A word is a signature term for a foreground corpus when its occurrence
//! rate there is unlikely under the background rate, measured by the
//! two-binomial likelihood-ratio statistic (-2 log lambda). Degenerate
//! tables score 0 and are never retained.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Token;

/// Content-word counts for one corpus side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenCounts {
    pub fn new() -> Self {
        TokenCounts::default()
    }

    pub fn from_tokens<'a, I: IntoIterator<Item = &'a Token>>(tokens: I) -> Self {
        let mut tc = TokenCounts::new();
        for tok in tokens {
            if tok.is_content {
                tc.add_word(&tok.lower);
            }
        }
        tc
    }

    pub fn add_word(&mut self, lower: &str) {
        *self.counts.entry(lower.to_string()).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &TokenCounts) {
        for (w, c) in &other.counts {
            *self.counts.entry(w.clone()).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn count(&self, lower: &str) -> u64 {
        self.counts.get(lower).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSignature {
    pub word: String,
    pub score: f64,
}

/// `k * ln(p)` with the convention `0 * ln(0) = 0`.
fn xlogy(k: f64, p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * p.ln()
    }
}

/// Binomial log-likelihood `k ln p + (n-k) ln(1-p)`.
fn log_binom(k: f64, n: f64, p: f64) -> f64 {
    xlogy(k, p) + xlogy(n - k, 1.0 - p)
}

/// Dunning's -2 log lambda for the 2x2 table
/// `(k1, n1-k1 / k2, n2-k2)`. Degenerate tables score 0.
pub fn llr_statistic(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return 0.0;
    }
    let (k1, n1, k2, n2) = (k1 as f64, n1 as f64, k2 as f64, n2 as f64);
    if k1 + k2 == 0.0 {
        return 0.0;
    }
    let p1 = k1 / n1;
    let p2 = k2 / n2;
    let p = (k1 + k2) / (n1 + n2);
    let stat = 2.0
        * (log_binom(k1, n1, p1) + log_binom(k2, n2, p2)
            - log_binom(k1, n1, p)
            - log_binom(k2, n2, p));
    // Rounding can push an exact-zero table a hair negative.
    stat.max(0.0)
}

/// Signature words of `foreground` against `background`: content words whose
/// statistic reaches `threshold` and whose foreground rate exceeds the
/// background rate. Sorted by score descending, then word ascending.
pub fn topic_signatures(
    foreground: &TokenCounts,
    background: &TokenCounts,
    threshold: f64,
) -> Vec<TopicSignature> {
    let n1 = foreground.total();
    let n2 = background.total();
    let mut out: Vec<TopicSignature> = Vec::new();
    for (word, k1) in foreground.words() {
        let k2 = background.count(word);
        let score = llr_statistic(k1, n1, k2, n2);
        if score < threshold {
            continue;
        }
        let p1 = k1 as f64 / n1 as f64;
        let p2 = if n2 == 0 {
            0.0
        } else {
            k2 as f64 / n2 as f64
        };
        if p1 > p2 {
            out.push(TopicSignature {
                word: word.to_string(),
                score,
            });
        }
    }
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.word.cmp(&b.word))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)]) -> TokenCounts {
        let mut tc = TokenCounts::new();
        for &(w, c) in pairs {
            for _ in 0..c {
                tc.add_word(w);
            }
        }
        tc
    }

    /// G-test identity: 2 * sum O ln(O/E) over the 2x2 table. An
    /// algebraically different route to the same statistic.
    fn gtest_oracle(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
        let cells = [
            (k1 as f64, n1 as f64, (k1 + k2) as f64),
            ((n1 - k1) as f64, n1 as f64, ((n1 - k1) + (n2 - k2)) as f64),
            (k2 as f64, n2 as f64, (k1 + k2) as f64),
            ((n2 - k2) as f64, n2 as f64, ((n1 - k1) + (n2 - k2)) as f64),
        ];
        let total = (n1 + n2) as f64;
        let mut g = 0.0;
        for (obs, row, col) in cells {
            if obs > 0.0 {
                let expected = row * col / total;
                g += obs * (obs / expected).ln();
            }
        }
        2.0 * g
    }

    #[test]
    fn identical_distributions_score_zero() {
        let fg = counts(&[("a", 3), ("b", 5)]);
        assert!(topic_signatures(&fg, &fg.clone(), 1e-6).is_empty());
    }

    #[test]
    fn toy_table_matches_brute_force() {
        let fg = counts(&[("a", 6), ("b", 2)]);
        let bg = counts(&[("a", 2), ("b", 6)]);
        let sigs = topic_signatures(&fg, &bg, 1.0);
        assert_eq!(sigs.len(), 1);
        assert_eq!(sigs[0].word, "a");
        let expect = gtest_oracle(6, 8, 2, 8);
        assert!((sigs[0].score - expect).abs() < 1e-9);
    }

    #[test]
    fn word_absent_from_foreground_excluded() {
        let fg = counts(&[("a", 4)]);
        let bg = counts(&[("a", 1), ("b", 9)]);
        let sigs = topic_signatures(&fg, &bg, 0.0);
        assert!(sigs.iter().all(|s| s.word != "b"));
    }

    #[test]
    fn agrees_with_gtest_on_small_tables() {
        for n1 in 1..=20u64 {
            for n2 in 1..=20u64 {
                for k1 in 0..=n1 {
                    for k2 in 0..=n2 {
                        let mine = llr_statistic(k1, n1, k2, n2);
                        let oracle = gtest_oracle(k1, n1, k2, n2).max(0.0);
                        assert!(
                            (mine - oracle).abs() < 1e-9,
                            "table ({k1},{n1},{k2},{n2}): {mine} vs {oracle}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_tables_score_zero() {
        assert_eq!(llr_statistic(0, 5, 0, 5), 0.0);
        assert_eq!(llr_statistic(3, 5, 0, 0), 0.0);
        assert_eq!(llr_statistic(0, 0, 2, 5), 0.0);
    }

    #[test]
    fn sorted_descending_with_word_tiebreak() {
        let fg = counts(&[("alpha", 6), ("beta", 6), ("gamma", 1)]);
        let bg = counts(&[("alpha", 1), ("beta", 1), ("gamma", 11)]);
        let sigs = topic_signatures(&fg, &bg, 0.1);
        assert_eq!(sigs.len(), 2);
        assert_eq!(sigs[0].word, "alpha");
        assert_eq!(sigs[1].word, "beta");
        assert!((sigs[0].score - sigs[1].score).abs() < 1e-12);
    }
}

//! Diversity statistics: distinct n-grams, type-token ratio, and the
//! fraction of tokens outside the top-K training vocabulary.

use std::collections::HashSet;

/// Average number of distinct n-grams per argument. Arguments shorter than
/// `n` contribute zero.
pub fn distinct_n(arguments: &[Vec<String>], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be at least 1");
    if arguments.is_empty() {
        return 0.0;
    }
    let total: usize = arguments
        .iter()
        .map(|arg| {
            if arg.len() < n {
                0
            } else {
                arg.windows(n).collect::<HashSet<_>>().len()
            }
        })
        .sum();
    total as f64 / arguments.len() as f64
}

/// Type-token ratio over the whole corpus: distinct n-grams divided by
/// total n-gram occurrences.
pub fn ttr_n(arguments: &[Vec<String>], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut distinct: HashSet<&[String]> = HashSet::new();
    let mut total = 0usize;
    for arg in arguments {
        if arg.len() < n {
            continue;
        }
        for gram in arg.windows(n) {
            distinct.insert(gram);
            total += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        distinct.len() as f64 / total as f64
    }
}

/// The `k` highest-frequency words; frequency ties break alphabetically so
/// the list is deterministic. A `k` larger than the vocabulary returns
/// everything.
pub fn top_k_words(vocab: &[(String, u64)], k: usize) -> HashSet<String> {
    let mut ranked: Vec<&(String, u64)> = vocab.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(k).map(|(w, _)| w.clone()).collect()
}

/// Fraction of argument tokens that fall outside the top-`k` training
/// words. Empty input scores zero.
pub fn uncommon_fraction(arguments: &[Vec<String>], vocab: &[(String, u64)], k: usize) -> f64 {
    let top = top_k_words(vocab, k);
    let mut total = 0usize;
    let mut outside = 0usize;
    for arg in arguments {
        for token in arg {
            total += 1;
            if !top.contains(token) {
                outside += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        outside as f64 / total as f64
    }
}

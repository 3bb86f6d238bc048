//! ROUGE-2 recall: matched bigrams over reference bigrams.

use std::collections::HashMap;

use crate::error::{CoreError, Result};

fn bigram_counts(tokens: &[String]) -> HashMap<(&str, &str), u64> {
    let mut counts = HashMap::new();
    for pair in tokens.windows(2) {
        *counts.entry((pair[0].as_str(), pair[1].as_str())).or_insert(0) += 1;
    }
    counts
}

/// Bigram recall with multiset clipping: each reference bigram can be
/// matched at most as often as it occurs in the hypothesis.
pub fn rouge2_recall(hyp: &[String], reference: &[String]) -> Result<f64> {
    if reference.is_empty() {
        return Err(CoreError::invalid("rouge2: empty reference"));
    }
    let ref_counts = bigram_counts(reference);
    let total: u64 = ref_counts.values().sum();
    if total == 0 {
        // Single-token reference has no bigrams to recall.
        return Ok(0.0);
    }
    let hyp_counts = bigram_counts(hyp);
    let matched: u64 = ref_counts
        .iter()
        .map(|(gram, count)| (*count).min(hyp_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    Ok(matched as f64 / total as f64)
}

//! Corpus-level BLEU with brevity penalty and additive smoothing.

use std::collections::HashMap;

use crate::error::{CoreError, Result};

/// Numerator substituted for zero clipped-match counts.
const SMOOTH_EPS: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU-n over hypothesis/reference-set pairs.
///
/// Modified n-gram precision clips each hypothesis n-gram count by the
/// maximum count across that pair's references. Orders with zero matches
/// contribute a numerator of 1e-9 instead, so the score stays positive.
/// The brevity penalty uses the closest reference length per pair (ties
/// take the shorter reference).
pub fn bleu(hyps: &[Vec<String>], refs: &[Vec<Vec<String>>], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(CoreError::invalid("bleu order must be at least 1"));
    }
    if hyps.len() != refs.len() {
        return Err(CoreError::invalid(format!(
            "bleu: {} hypotheses but {} reference sets",
            hyps.len(),
            refs.len()
        )));
    }
    for set in refs {
        if set.is_empty() || set.iter().any(|r| r.is_empty()) {
            return Err(CoreError::invalid("bleu: empty reference"));
        }
    }
    if hyps.is_empty() {
        return Err(CoreError::invalid("bleu: no pairs to score"));
    }

    let mut matches = vec![0u64; n];
    let mut totals = vec![0u64; n];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, ref_set) in hyps.iter().zip(refs) {
        hyp_len += hyp.len() as u64;
        let closest = ref_set
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| {
                let diff = (len as i64 - hyp.len() as i64).unsigned_abs();
                (diff, len)
            })
            .expect("nonempty reference set");
        ref_len += closest as u64;

        for order in 1..=n {
            let hyp_counts = ngram_counts(hyp, order);
            let mut max_ref: HashMap<&[String], u64> = HashMap::new();
            for r in ref_set {
                for (gram, count) in ngram_counts(r, order) {
                    let entry = max_ref.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                totals[order - 1] += count;
                let clip = max_ref.get(gram).copied().unwrap_or(0);
                matches[order - 1] += (*count).min(clip);
            }
        }
    }

    if hyp_len == 0 {
        return Ok(0.0);
    }

    let mut log_sum = 0.0;
    for order in 0..n {
        let numer = if matches[order] == 0 {
            SMOOTH_EPS
        } else {
            matches[order] as f64
        };
        let denom = (totals[order] as f64).max(SMOOTH_EPS);
        log_sum += (numer / denom).ln();
    }
    let precision_term = (log_sum / n as f64).exp();

    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(bp * precision_term)
}

//! Distance-discounted stance scoring.
//!
//! Each sentiment-word occurrence near an opinion target contributes its
//! polarity discounted by the fifth power of the token distance:
//! `Q = sum over targets, sum over sentiment words of sgn(l) * d^-5`,
//! where `d` is the offset between the sentiment token and the target's
//! first token, floored at 1.

use serde::{Deserialize, Serialize};

use super::rank::RankedPassage;
use crate::textproc::{SentimentLexicon, Token};

/// Opinion targets (statement keyphrases, as lowercased word sequences)
/// plus the polarity lexicon.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StanceTargets {
    pub targets: Vec<Vec<String>>,
    pub lexicon: SentimentLexicon,
}

impl StanceTargets {
    pub fn new(targets: Vec<Vec<String>>, lexicon: SentimentLexicon) -> Self {
        StanceTargets { targets, lexicon }
    }
}

/// All first-token positions where `words` occurs contiguously.
fn occurrences(tokens: &[Token], words: &[String]) -> Vec<usize> {
    if words.is_empty() || words.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - words.len())
        .filter(|&i| {
            tokens[i..i + words.len()]
                .iter()
                .zip(words)
                .all(|(t, w)| t.lower == *w)
        })
        .collect()
}

/// Signed stance score Q of a token sequence toward the targets.
pub fn stance_score(tokens: &[Token], targets: &StanceTargets) -> f64 {
    let sentiment: Vec<(usize, f64)> = tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            targets
                .lexicon
                .polarity(&t.lower)
                .map(|p| (i, f64::from(p)))
        })
        .collect();
    if sentiment.is_empty() {
        return 0.0;
    }
    let mut q = 0.0;
    for words in &targets.targets {
        for pos in occurrences(tokens, words) {
            for &(i, sign) in &sentiment {
                let d = pos.abs_diff(i).max(1) as f64;
                q += sign * d.powi(-5);
            }
        }
    }
    q
}

/// Filters ranked passages by stance: keep when |Q| exceeds `threshold`
/// and the sign opposes the statement's. A zero statement score waives the
/// sign condition.
pub fn stance_filter(
    passages: Vec<RankedPassage>,
    statement_q: f64,
    threshold: f64,
) -> Vec<RankedPassage> {
    passages
        .into_iter()
        .filter(|rp| {
            if rp.stance.abs() <= threshold {
                return false;
            }
            statement_q == 0.0 || rp.stance * statement_q < 0.0
        })
        .collect()
}

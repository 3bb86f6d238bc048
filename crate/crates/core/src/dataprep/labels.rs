//! Gold-label construction: argumentative-function labels per sentence and
//! keyphrase-selection sets per sentence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::textproc::{DiscourseMarker, Keyphrase, Sentence};

/// Argumentative function of a gold-argument sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionLabel {
    /// Carries topic-bearing critical content.
    Content,
    /// Stylistic or generic discourse move.
    Filler,
}

/// Pronouns used by the backward pass. Fixed list; matching is on
/// lowercased word tokens.
pub fn pronoun_list() -> &'static [&'static str] {
    &[
        "he", "she", "it", "they", "them", "this", "that", "these", "those", "i", "we", "you",
        "his", "her", "its", "their",
    ]
}

/// First marker phrase matching the sentence start, if any. Leading
/// punctuation (quotes, dashes) is skipped; the marker words must then
/// match consecutively.
pub fn leading_marker<'a>(
    sentence: &Sentence,
    markers: &'a [DiscourseMarker],
) -> Option<&'a DiscourseMarker> {
    let first_word = sentence.tokens.iter().position(|t| t.is_word())?;
    let lowers: Vec<&str> = sentence.tokens[first_word..]
        .iter()
        .map(|t| t.lower.as_str())
        .collect();
    markers.iter().find(|m| m.matches_start(&lowers))
}

/// Labels each sentence Content or Filler.
///
/// A sentence is Content when it has at least 10 words (20 for questions)
/// and either contains two distinct signature words, or one signature word
/// plus a leading discourse marker. A backward pass then marks the
/// predecessor of any Content sentence whose first three words contain a
/// pronoun; the pass is idempotent.
pub fn label_functions(
    sentences: &[Sentence],
    stmt_signatures: &BTreeSet<String>,
    arg_signatures: &BTreeSet<String>,
    markers: &[DiscourseMarker],
    pronouns: &[&str],
) -> Result<Vec<FunctionLabel>> {
    if sentences.is_empty() {
        return Err(CoreError::invalid("cannot label an empty sentence list"));
    }
    let mut labels: Vec<FunctionLabel> = sentences
        .iter()
        .map(|s| {
            let min_words = if s.is_question { 20 } else { 10 };
            if s.word_count() < min_words {
                return FunctionLabel::Filler;
            }
            let hits: BTreeSet<&str> = s
                .content_words()
                .filter(|w| stmt_signatures.contains(*w) || arg_signatures.contains(*w))
                .collect();
            let content = hits.len() >= 2
                || (hits.len() == 1 && leading_marker(s, markers).is_some());
            if content {
                FunctionLabel::Content
            } else {
                FunctionLabel::Filler
            }
        })
        .collect();

    // Backward pronoun pass. Walking from the end lets a chain of
    // pronoun-opening sentences propagate in one sweep.
    for j in (1..sentences.len()).rev() {
        if labels[j] != FunctionLabel::Content {
            continue;
        }
        let opens_with_pronoun = sentences[j]
            .tokens
            .iter()
            .filter(|t| t.is_word())
            .take(3)
            .any(|t| pronouns.contains(&t.lower.as_str()));
        if opens_with_pronoun {
            labels[j - 1] = FunctionLabel::Content;
        }
    }
    Ok(labels)
}

/// One selected keyphrase with the content word that justified it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selected {
    pub memory_index: usize,
    pub witness: String,
}

/// Selection sets C(j) over the memory, one per gold sentence.
///
/// A keyphrase is selected for sentence j when they share a lowercased
/// content word. Entry 0 is always empty: the first planner step feeds the
/// start marker instead of memory entries.
pub fn selection_labels(memory: &[Keyphrase], gold: &[Sentence]) -> Vec<Vec<Selected>> {
    let stopwords = crate::textproc::builtin_stopwords();
    gold.iter()
        .enumerate()
        .map(|(j, sentence)| {
            if j == 0 {
                return Vec::new();
            }
            let words: BTreeSet<&str> = sentence.content_words().collect();
            memory
                .iter()
                .enumerate()
                .filter_map(|(m, kp)| {
                    kp.words
                        .iter()
                        .find(|w| !stopwords.contains(*w) && words.contains(w.as_str()))
                        .map(|w| Selected {
                            memory_index: m,
                            witness: w.clone(),
                        })
                })
                .collect()
        })
        .collect()
}

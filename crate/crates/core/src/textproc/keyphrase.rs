//! Keyphrase selection over chunker output.
//!
//! A candidate span survives when it has at least one content word, at most
//! ten tokens, and either contains an expanded topic-signature word or
//! equals a gazetteer title. Surviving phrases get a bag-of-words embedding:
//! the sum of member word vectors, with unknown words contributing zero.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::chunk::{chunk_candidates, PhraseKind};
use super::lexicon::{Gazetteer, WordVectors};
use super::Sentence;
use crate::error::Result;

pub const MAX_KEYPHRASE_TOKENS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyphrase {
    /// Lowercased member tokens; also the deduplication key.
    pub words: Vec<String>,
    /// Display form: surfaces of the first occurrence, space-joined.
    pub surface: String,
    pub kind: PhraseKind,
    /// Sum of member word vectors.
    pub embedding: Vec<f64>,
}

impl Keyphrase {
    /// Lowercased space-joined form (gazetteer lookup key).
    pub fn joined_lower(&self) -> String {
        self.words.join(" ")
    }
}

/// Extracts keyphrases from tagged sentences. Duplicate phrases (same
/// lowercased token sequence) are merged, keeping first-occurrence order.
pub fn extract_keyphrases(
    sentences: &[Sentence],
    expanded_signatures: &BTreeSet<String>,
    gazetteer: &Gazetteer,
    vectors: &WordVectors,
) -> Result<Vec<Keyphrase>> {
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut out: Vec<Keyphrase> = Vec::new();
    for sentence in sentences {
        for span in chunk_candidates(&sentence.tokens)? {
            let tokens = &sentence.tokens[span.start..span.end];
            if tokens.len() > MAX_KEYPHRASE_TOKENS {
                continue;
            }
            if !tokens.iter().any(|t| t.is_content) {
                continue;
            }
            let words: Vec<String> = tokens.iter().map(|t| t.lower.clone()).collect();
            let signature_hit = words.iter().any(|w| expanded_signatures.contains(w));
            let gazetteer_hit = gazetteer.contains(&words.join(" "));
            if !signature_hit && !gazetteer_hit {
                continue;
            }
            if !seen.insert(words.clone()) {
                continue;
            }
            let mut embedding = vec![0.0; vectors.dim()];
            for w in &words {
                if let Some(v) = vectors.get(w) {
                    for (e, x) in embedding.iter_mut().zip(v) {
                        *e += x;
                    }
                }
            }
            let surface = tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            out.push(Keyphrase {
                words,
                surface,
                kind: span.kind,
                embedding,
            });
        }
    }
    Ok(out)
}

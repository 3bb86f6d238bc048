//! Text processing: tokenization, sentence splitting, POS tagging,
//! chunking-grammar keyphrase candidates, topic signatures, and keyphrase
//! selection.
//!
//! Everything here is a pure function over immutable inputs once the lexicon
//! tables are loaded; concurrent use is safe.

mod chunk;
mod keyphrase;
mod lexicon;
mod pos;
mod signatures;
mod tokenize;

pub use chunk::{chunk_candidates, ChunkSpan, PhraseKind};
pub use keyphrase::{extract_keyphrases, Keyphrase};
pub use lexicon::{
    builtin_gazetteer, builtin_markers, builtin_relation_lexicon, builtin_sentiment_lexicon,
    builtin_stopwords, expand_terms, load_gazetteer, load_marker_file, load_relation_lexicon,
    load_sentiment_lexicon, load_stopwords, load_word_vectors, DiscourseMarker, Gazetteer,
    MarkerGroup, Relation, RelationLexicon, SentimentLexicon, WordVectors,
};
pub use pos::{apply_sidecar, parse_sidecar, pos_tag, Pos, Tagger};
pub use signatures::{llr_statistic, topic_signatures, TokenCounts, TopicSignature};
pub use tokenize::{builtin_abbreviations, Tokenizer};

use serde::{Deserialize, Serialize};

/// A single surface token with its case-folded form, an optional POS tag,
/// and a content-word flag.
///
/// `is_content` is true iff the token is not a stopword and contains at
/// least one alphanumeric character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Pos>,
    pub is_content: bool,
}

impl Token {
    /// True when the token carries word content (at least one letter or digit).
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(|c| c.is_alphanumeric())
    }
}

/// A sentence of tokens. `is_question` is set when the final non-quote
/// token is `?`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub is_question: bool,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        let is_question = Self::detect_question(&tokens);
        Sentence { tokens, is_question }
    }

    fn detect_question(tokens: &[Token]) -> bool {
        const QUOTES: &[&str] = &["\"", "'", "''", "``", "\u{2018}", "\u{2019}", "\u{201c}", "\u{201d}", ")", "]"];
        tokens
            .iter()
            .rev()
            .find(|t| !QUOTES.contains(&t.surface.as_str()))
            .map(|t| t.surface == "?")
            .unwrap_or(false)
    }

    /// Number of word tokens (tokens with at least one alphanumeric char).
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word()).count()
    }

    /// Lowercased content words, in order.
    pub fn content_words(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .filter(|t| t.is_content)
            .map(|t| t.lower.as_str())
    }
}

/// Joins token surfaces with single spaces. Re-tokenizing the result yields
/// the same token sequence.
pub fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.surface.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

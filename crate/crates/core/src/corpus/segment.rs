//! Sliding-window passage segmentation.
//!
//! Windows of `window_sentences` sentences start every `window_step`
//! sentences. A window shorter than the word minimum grows rightward one
//! sentence at a time; if it still cannot reach the minimum it is dropped.

use serde::{Deserialize, Serialize};

use super::article::Article;
use crate::textproc::Token;

/// A contiguous sentence span of one article, the retrieval unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Passage {
    pub article_id: String,
    /// Sentence span `[start, end)` within the article.
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
    /// Number of word tokens (alphanumeric-bearing).
    pub word_count: usize,
    pub medium: String,
}

impl Passage {
    /// Stable passage id, sortable as a string: `article_id:start`.
    pub fn id(&self) -> String {
        passage_id(&self.article_id, self.start)
    }

    /// Lowercased content words in order.
    pub fn content_words(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .filter(|t| t.is_content)
            .map(|t| t.lower.as_str())
    }
}

pub fn passage_id(article_id: &str, start: usize) -> String {
    format!("{article_id}:{start:04}")
}

/// Segments one article into passages.
pub fn segment(
    article: &Article,
    window_sentences: usize,
    window_step: usize,
    min_words: usize,
) -> Vec<Passage> {
    let n = article.sentences.len();
    let mut out = Vec::new();
    if n == 0 || window_sentences == 0 || window_step == 0 {
        return out;
    }
    let mut start = 0;
    while start < n {
        let mut end = (start + window_sentences).min(n);
        let mut words: usize = article.sentences[start..end]
            .iter()
            .map(|s| s.word_count())
            .sum();
        while words < min_words && end < n {
            words += article.sentences[end].word_count();
            end += 1;
        }
        if words >= min_words {
            let tokens: Vec<Token> = article.sentences[start..end]
                .iter()
                .flat_map(|s| s.tokens.iter().cloned())
                .collect();
            out.push(Passage {
                article_id: article.id.clone(),
                start,
                end,
                tokens,
                word_count: words,
                medium: article.medium.clone(),
            });
        }
        start += window_step;
    }
    out
}

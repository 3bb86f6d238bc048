//! Query formulation: one query per statement sentence, emitted only when
//! the sentence carries enough distinct content.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::textproc::Sentence;

/// A content-word multiset drawn from one statement sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    terms: BTreeMap<String, u32>,
    pub source_sentence: usize,
}

impl Query {
    pub fn from_terms<I: IntoIterator<Item = String>>(terms: I, source_sentence: usize) -> Self {
        let mut map = BTreeMap::new();
        for t in terms {
            *map.entry(t).or_insert(0) += 1;
        }
        Query {
            terms: map,
            source_sentence,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &u32)> {
        self.terms.iter().map(|(t, c)| (t.as_str(), c))
    }

    pub fn distinct_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_terms(&self) -> u32 {
        self.terms.values().sum()
    }
}

/// Emission rule: content-word count strictly above 5 (10 for questions)
/// and at least 3 distinct content words.
pub fn query_emitted(sentence: &Sentence) -> bool {
    let content: Vec<&str> = sentence.content_words().collect();
    let min = if sentence.is_question { 10 } else { 5 };
    if content.len() <= min {
        return false;
    }
    let distinct: std::collections::BTreeSet<&str> = content.iter().copied().collect();
    distinct.len() >= 3
}

/// One query per qualifying sentence, in sentence order.
pub fn formulate_queries(sentences: &[Sentence]) -> Vec<Query> {
    sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| query_emitted(s))
        .map(|(i, s)| Query::from_terms(s.content_words().map(str::to_string), i))
        .collect()
}

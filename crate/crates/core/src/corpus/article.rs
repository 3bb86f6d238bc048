//! Article ingestion: line-delimited JSON records in, deduplicated
//! sentence-split articles out, with a rejection report for everything
//! dropped along the way.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::textproc::{Sentence, Tokenizer};

/// One raw input record, as found in the ingest file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub medium: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    pub text: String,
}

/// A kept article. The id is a stable hash of the normalized text, so
/// re-ingesting the same content always yields the same id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub medium: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Article {
    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(Sentence::word_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Malformed,
    Duplicate,
    TooShort,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based input line number.
    pub line: usize,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub kept: usize,
    pub rejections: Vec<Rejection>,
}

/// Lowercases and collapses whitespace; the deduplication key.
fn normalize(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Hex id from the normalized text.
fn article_id(normalized: &str) -> String {
    let digest = Sha256::digest(normalized.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Ingests line-delimited JSON records. Malformed lines, exact duplicates
/// (on normalized text), and articles under `min_words` words become
/// rejection entries; the stream continues past all of them.
pub fn ingest<I>(
    lines: I,
    tokenizer: &Tokenizer,
    min_words: usize,
) -> (Vec<Article>, IngestReport)
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut articles = Vec::new();
    let mut report = IngestReport::default();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, line) in lines.into_iter().enumerate() {
        let line_no = idx + 1;
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                report.rejections.push(Rejection {
                    line: line_no,
                    reason: RejectReason::Malformed,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        if record.medium.trim().is_empty() {
            report.rejections.push(Rejection {
                line: line_no,
                reason: RejectReason::Malformed,
                detail: "empty medium".to_string(),
            });
            continue;
        }
        let normalized = normalize(&record.text);
        if !seen.insert(normalized.clone()) {
            report.rejections.push(Rejection {
                line: line_no,
                reason: RejectReason::Duplicate,
                detail: article_id(&normalized),
            });
            continue;
        }
        let sentences = tokenizer.split_sentences(&record.text);
        let words: usize = sentences.iter().map(Sentence::word_count).sum();
        if words < min_words {
            report.rejections.push(Rejection {
                line: line_no,
                reason: RejectReason::TooShort,
                detail: format!("{words} words"),
            });
            continue;
        }
        articles.push(Article {
            id: article_id(&normalized),
            medium: record.medium,
            date: record.date,
            text: record.text,
            sentences,
        });
        report.kept += 1;
    }
    (articles, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(text: &str) -> String {
        serde_json::to_string(&RawRecord {
            id: None,
            medium: "news".to_string(),
            date: None,
            text: text.to_string(),
        })
        .unwrap()
    }

    fn long_text(words: usize) -> String {
        let mut t = String::new();
        for i in 0..words {
            t.push_str(&format!("word{i} "));
        }
        t.push('.');
        t
    }

    #[test]
    fn empty_stream_yields_empty_output() {
        let tk = Tokenizer::builtin();
        let (articles, report) = ingest(Vec::<String>::new(), &tk, 50);
        assert!(articles.is_empty());
        assert_eq!(report.kept, 0);
    }

    #[test]
    fn byte_identical_duplicates_collapse_to_first() {
        let tk = Tokenizer::builtin();
        let line = record(&long_text(60));
        let (articles, report) = ingest([line.clone(), line], &tk, 50);
        assert_eq!(articles.len(), 1);
        assert_eq!(report.rejections.len(), 1);
        assert_eq!(report.rejections[0].reason, RejectReason::Duplicate);
        assert_eq!(report.rejections[0].line, 2);
    }

    #[test]
    fn whitespace_and_case_variants_also_collapse() {
        let tk = Tokenizer::builtin();
        let a = record(&long_text(60));
        let b = record(&long_text(60).to_uppercase().replace(' ', "  "));
        let (articles, _) = ingest([a, b], &tk, 50);
        assert_eq!(articles.len(), 1);
    }

    #[test]
    fn short_article_rejected() {
        let tk = Tokenizer::builtin();
        let (articles, report) = ingest([record(&long_text(49))], &tk, 50);
        assert!(articles.is_empty());
        assert_eq!(report.rejections[0].reason, RejectReason::TooShort);
    }

    #[test]
    fn malformed_line_does_not_stop_the_stream() {
        let tk = Tokenizer::builtin();
        let (articles, report) = ingest(["{not json", &record(&long_text(60))], &tk, 50);
        assert_eq!(articles.len(), 1);
        assert_eq!(report.rejections.len(), 1);
        assert_eq!(report.rejections[0].reason, RejectReason::Malformed);
        assert_eq!(report.rejections[0].line, 1);
    }

    #[test]
    fn ids_are_stable_across_runs() {
        let tk = Tokenizer::builtin();
        let (a1, _) = ingest([record(&long_text(60))], &tk, 50);
        let (a2, _) = ingest([record(&long_text(60))], &tk, 50);
        assert_eq!(a1[0].id, a2[0].id);
        assert_eq!(a1[0].id.len(), 16);
    }
}

//! Inverted index with BM25 retrieval.
//!
//! Terms are lowercased word tokens (stopwords included), so the sum of a
//! passage's term frequencies equals its word count. Scoring uses
//! `idf = ln((N - df + 0.5)/(df + 0.5) + 1)`, which is strictly positive, so
//! every passage sharing a term with the query scores above zero and
//! passages sharing nothing are never returned.
//!
//! # File format (version 1)
//!
//! Little-endian throughout; strings are u32-length-prefixed UTF-8.
//!
//! ```text
//! magic   8 bytes  "CNDLIDX1"
//! k1, b, avgdl     3 x f64
//! doc_count        u64
//! docs             article_id str, start u64, end u64, medium str,
//!                  word_count u64, text str   (x doc_count, id-sorted)
//! term_count       u64
//! terms            term str, posting_count u64,
//!                  (doc_slot u32, tf u32) x posting_count
//! ```
//!
//! The passage text is stored as space-joined token surfaces and
//! re-tokenized on load; tokenization is idempotent over its own output.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use super::query::Query;
use super::segment::Passage;
use crate::binio;
use crate::error::{CoreError, Result};
use crate::textproc::Tokenizer;

const MAGIC: &[u8; 8] = b"CNDLIDX1";
const MAX_STR: u32 = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Index {
    k1: f64,
    b: f64,
    avgdl: f64,
    /// Passages sorted by id; posting slots point here.
    docs: Vec<Passage>,
    /// term -> (doc slot, term frequency), slots ascending.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScoredPassage {
    pub passage: Passage,
    pub score: f64,
}

impl Index {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn docs(&self) -> &[Passage] {
        &self.docs
    }

    pub fn postings(&self) -> impl Iterator<Item = (&str, &[(u32, u32)])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// BM25 score of one document for one query; used by retrieval and
    /// exposed for auditing.
    fn score_doc(&self, slot: u32, acc: &mut HashMap<u32, f64>, idf: f64, tf: u32, qtf: f64) {
        let dl = self.docs[slot as usize].word_count as f64;
        let tf = tf as f64;
        let denom = tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl);
        *acc.entry(slot).or_insert(0.0) += qtf * idf * tf * (self.k1 + 1.0) / denom;
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        binio::write_f64(w, self.k1)?;
        binio::write_f64(w, self.b)?;
        binio::write_f64(w, self.avgdl)?;
        binio::write_u64(w, self.docs.len() as u64)?;
        for doc in &self.docs {
            binio::write_str(w, &doc.article_id)?;
            binio::write_u64(w, doc.start as u64)?;
            binio::write_u64(w, doc.end as u64)?;
            binio::write_str(w, &doc.medium)?;
            binio::write_u64(w, doc.word_count as u64)?;
            binio::write_str(w, &crate::textproc::join_tokens(&doc.tokens))?;
        }
        binio::write_u64(w, self.postings.len() as u64)?;
        for (term, posts) in &self.postings {
            binio::write_str(w, term)?;
            binio::write_u64(w, posts.len() as u64)?;
            for &(slot, tf) in posts {
                binio::write_u32(w, slot)?;
                binio::write_u32(w, tf)?;
            }
        }
        Ok(())
    }

    pub fn read_from(path: &Path, tokenizer: &Tokenizer) -> Result<Index> {
        let bytes = std::fs::read(path)?;
        Index::read(&mut bytes.as_slice(), tokenizer)
    }

    pub fn read<R: Read>(r: &mut R, tokenizer: &Tokenizer) -> Result<Index> {
        binio::expect_magic(r, MAGIC)?;
        let k1 = binio::read_f64(r)?;
        let b = binio::read_f64(r)?;
        let avgdl = binio::read_f64(r)?;
        let doc_count = binio::read_u64(r)?;
        let mut docs = Vec::with_capacity(doc_count.min(1 << 24) as usize);
        for _ in 0..doc_count {
            let article_id = binio::read_str(r, MAX_STR)?;
            let start = binio::read_u64(r)? as usize;
            let end = binio::read_u64(r)? as usize;
            let medium = binio::read_str(r, MAX_STR)?;
            let word_count = binio::read_u64(r)? as usize;
            let text = binio::read_str(r, MAX_STR)?;
            docs.push(Passage {
                article_id,
                start,
                end,
                tokens: tokenizer.tokenize(&text),
                word_count,
                medium,
            });
        }
        let term_count = binio::read_u64(r)?;
        let mut postings = BTreeMap::new();
        for _ in 0..term_count {
            let term = binio::read_str(r, MAX_STR)?;
            let n = binio::read_u64(r)?;
            let mut posts = Vec::with_capacity(n.min(1 << 24) as usize);
            for _ in 0..n {
                let slot = binio::read_u32(r)?;
                let tf = binio::read_u32(r)?;
                if slot as u64 >= doc_count {
                    return Err(CoreError::invalid(format!(
                        "posting for `{term}` references doc slot {slot} of {doc_count}"
                    )));
                }
                posts.push((slot, tf));
            }
            postings.insert(term, posts);
        }
        Ok(Index {
            k1,
            b,
            avgdl,
            docs,
            postings,
        })
    }
}

/// Builds the index. Passages are sorted by id; duplicate ids are rejected.
pub fn build_index(passages: Vec<Passage>, k1: f64, b: f64) -> Result<Index> {
    if passages.is_empty() {
        return Err(CoreError::invalid("cannot index an empty passage list"));
    }
    let mut docs = passages;
    docs.sort_by_key(|x| x.id());
    for pair in docs.windows(2) {
        if pair[0].id() == pair[1].id() {
            return Err(CoreError::invalid(format!(
                "duplicate passage id `{}`",
                pair[0].id()
            )));
        }
    }
    let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    let mut total_len: u64 = 0;
    for (slot, doc) in docs.iter().enumerate() {
        total_len += doc.word_count as u64;
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for tok in &doc.tokens {
            if tok.is_word() {
                *counts.entry(tok.lower.as_str()).or_insert(0) += 1;
            }
        }
        for (term, tf) in counts {
            postings
                .entry(term.to_string())
                .or_default()
                .push((slot as u32, tf));
        }
    }
    let avgdl = total_len as f64 / docs.len() as f64;
    Ok(Index {
        k1,
        b,
        avgdl,
        docs,
        postings,
    })
}

/// Top-k passages of `medium` by BM25. Ties break by passage id ascending.
/// Unknown media simply match nothing.
pub fn retrieve(index: &Index, query: &Query, k: usize, medium: &str) -> Vec<ScoredPassage> {
    let n = index.docs.len() as f64;
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for (term, &qtf) in query.terms() {
        let Some(posts) = index.postings.get(term) else {
            continue;
        };
        let df = posts.len() as f64;
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        for &(slot, tf) in posts {
            if index.docs[slot as usize].medium == medium {
                index.score_doc(slot, &mut acc, idf, tf, qtf as f64);
            }
        }
    }
    let mut scored: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, s)| s > 0.0).collect();
    // Docs are id-sorted, so ascending slot is ascending id.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
        .into_iter()
        .map(|(slot, score)| ScoredPassage {
            passage: index.docs[slot as usize].clone(),
            score,
        })
        .collect()
}

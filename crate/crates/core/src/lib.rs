//! Retrieval, ranking, and evaluation support for counter-argument generation.
//!
//! The pipeline implemented across this crate and `candela-nn`:
//!
//! 1. [`corpus`] — article ingestion, sliding-window passage segmentation,
//!    an inverted index with BM25 scoring, and per-sentence query formulation.
//! 2. [`textproc`] — tokenization, POS tagging, chunking-grammar keyphrase
//!    candidates, log-likelihood-ratio topic signatures, and keyphrase
//!    selection.
//! 3. [`ranker`] — merge/rank/diversity/stance filtering of retrieved
//!    passages, plus the oracle reranking used to build training data.
//! 4. [`dataprep`] — argumentative-function labels, keyphrase selection
//!    labels, and training-pair assembly.
//! 5. [`evalkit`] — BLEU, ROUGE-2 recall, METEOR-lite, distinct-n, and
//!    related corpus statistics.
//!
//! All operations are deterministic: identical inputs (and seeds, where
//! randomness is involved) produce identical outputs.

pub mod binio;
pub mod config;
pub mod corpus;
pub mod dataprep;
pub mod evalkit;
pub mod ranker;
pub mod synth;
pub mod textproc;

mod error;

pub use error::{CoreError, Result};

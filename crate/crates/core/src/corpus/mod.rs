//! Corpus handling: article ingestion and deduplication, sliding-window
//! passage segmentation, an inverted index with BM25 retrieval, and query
//! formulation from statement sentences.

mod article;
mod index;
mod query;
mod segment;

pub use article::{ingest, Article, IngestReport, RawRecord, RejectReason, Rejection};
pub use index::{build_index, retrieve, Index, ScoredPassage};
pub use query::{formulate_queries, Query};
pub use segment::{segment, Passage};

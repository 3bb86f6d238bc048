//! Lexicon, gazetteer, and word-vector loading.
//!
//! Every resource ships with a built-in copy. Setting `CANDELA_DATA_DIR`
//! to a directory replaces any resource whose file name exists there:
//!
//! | file                   | resource                         |
//! |------------------------|----------------------------------|
//! | `stopwords.txt`        | stopword list                    |
//! | `abbreviations.txt`    | sentence-splitting abbreviations |
//! | `pos_lexicon.txt`      | tagger lexicon (`word<TAB>TAG`)  |
//! | `discourse_markers.txt`| discourse marker phrases         |
//! | `sentiment_lexicon.txt`| word polarity table              |
//! | `relation_lexicon.txt` | signature expansion relations    |
//! | `gazetteer.txt`        | article-title gazetteer          |
//! | `word_vectors.txt`     | keyphrase word vectors           |
//!
//! There is no built-in vector table; without `word_vectors.txt` the
//! keyphrase embeddings are zero vectors, which only affects the stored
//! `embedding` field (the generator learns its own token embeddings).

use std::path::PathBuf;

use candela_core::textproc::{
    builtin_abbreviations, builtin_gazetteer, builtin_markers, builtin_relation_lexicon,
    builtin_sentiment_lexicon, builtin_stopwords, load_gazetteer, load_marker_file,
    load_relation_lexicon, load_sentiment_lexicon, load_stopwords, load_word_vectors,
    DiscourseMarker, Gazetteer, RelationLexicon, SentimentLexicon, Tagger, Tokenizer, WordVectors,
};

use crate::errors::Result;

pub const DATA_DIR_ENV: &str = "CANDELA_DATA_DIR";

/// Dimension of the zero vectors used when no vector table is configured.
const DEFAULT_VECTOR_DIM: usize = 50;

pub struct Resources {
    pub tokenizer: Tokenizer,
    pub tagger: Tagger,
    pub markers: Vec<DiscourseMarker>,
    pub sentiment: SentimentLexicon,
    pub relations: RelationLexicon,
    pub gazetteer: Gazetteer,
    pub vectors: WordVectors,
}

impl Resources {
    pub fn load() -> Result<Self> {
        let dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let file = |name: &str| -> Option<PathBuf> {
            dir.as_ref().map(|d| d.join(name)).filter(|p| p.is_file())
        };

        let stopwords = match file("stopwords.txt") {
            Some(p) => load_stopwords(&p)?,
            None => builtin_stopwords(),
        };
        // Same one-word-per-line format as the stopword list.
        let abbreviations = match file("abbreviations.txt") {
            Some(p) => load_stopwords(&p)?,
            None => builtin_abbreviations(),
        };
        let tagger = match file("pos_lexicon.txt") {
            Some(p) => Tagger::from_file(&p)?,
            None => Tagger::builtin(),
        };
        let markers = match file("discourse_markers.txt") {
            Some(p) => load_marker_file(&p)?,
            None => builtin_markers(),
        };
        let sentiment = match file("sentiment_lexicon.txt") {
            Some(p) => load_sentiment_lexicon(&p)?,
            None => builtin_sentiment_lexicon(),
        };
        let relations = match file("relation_lexicon.txt") {
            Some(p) => load_relation_lexicon(&p)?,
            None => builtin_relation_lexicon(),
        };
        let gazetteer = match file("gazetteer.txt") {
            Some(p) => load_gazetteer(&p)?,
            None => builtin_gazetteer(),
        };
        let vectors = match file("word_vectors.txt") {
            Some(p) => load_word_vectors(&p)?,
            None => WordVectors::new(DEFAULT_VECTOR_DIM),
        };

        Ok(Resources {
            tokenizer: Tokenizer::new(stopwords, abbreviations),
            tagger,
            markers,
            sentiment,
            relations,
            gazetteer,
            vectors,
        })
    }
}

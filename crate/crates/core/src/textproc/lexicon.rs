//! Loaders for the lexical data files: stopwords, discourse markers,
//! sentiment polarity, word relations, gazetteer titles, and word vectors.
//!
//! Each file ships as a builtin (compiled in) and can also be loaded from
//! disk. All tables are read-only after load.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::signatures::TopicSignature;
use crate::error::{CoreError, Result};

const STOPWORDS_FILE: &str = include_str!("../../data/stopwords.txt");
const MARKERS_FILE: &str = include_str!("../../data/discourse_markers.txt");
const SENTIMENT_FILE: &str = include_str!("../../data/sentiment_lexicon.txt");
const RELATIONS_FILE: &str = include_str!("../../data/relation_lexicon.txt");
const GAZETTEER_FILE: &str = include_str!("../../data/gazetteer.txt");

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(CoreError::Io)
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------- stopwords

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    Ok(parse_stopwords(&read(path)?))
}

pub fn builtin_stopwords() -> HashSet<String> {
    parse_stopwords(STOPWORDS_FILE)
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

// ---------------------------------------------------- discourse markers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerGroup {
    Contrast,
    Restatement,
    Result,
}

impl MarkerGroup {
    fn parse(s: &str) -> Option<MarkerGroup> {
        Some(match s {
            "contrast" => MarkerGroup::Contrast,
            "restatement" => MarkerGroup::Restatement,
            "result" => MarkerGroup::Result,
            _ => return None,
        })
    }
}

/// A marker phrase, stored as lowercased words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscourseMarker {
    pub words: Vec<String>,
    pub group: MarkerGroup,
}

impl DiscourseMarker {
    /// True when the lowercased word sequence starts with this phrase.
    pub fn matches_start(&self, lowers: &[&str]) -> bool {
        lowers.len() >= self.words.len()
            && self
                .words
                .iter()
                .zip(lowers)
                .all(|(w, l)| w == l)
    }
}

/// Marker file: `[group]` section headers, one phrase per line.
pub fn load_marker_file(path: &Path) -> Result<Vec<DiscourseMarker>> {
    parse_markers(&source_name(path), &read(path)?)
}

pub fn builtin_markers() -> Vec<DiscourseMarker> {
    parse_markers("builtin discourse_markers.txt", MARKERS_FILE)
        .expect("builtin marker file is well-formed")
}

fn parse_markers(source: &str, text: &str) -> Result<Vec<DiscourseMarker>> {
    let mut out = Vec::new();
    let mut group: Option<MarkerGroup> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            group = Some(MarkerGroup::parse(name).ok_or_else(|| {
                CoreError::parse(source, idx + 1, format!("unknown marker group `{name}`"))
            })?);
            continue;
        }
        let group = group.ok_or_else(|| {
            CoreError::parse(source, idx + 1, "marker phrase before any [group] header")
        })?;
        out.push(DiscourseMarker {
            words: line
                .to_lowercase()
                .split_whitespace()
                .map(str::to_string)
                .collect(),
            group,
        });
    }
    Ok(out)
}

// ------------------------------------------------------ sentiment lexicon

/// Word polarity table: +1 or -1 per word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    polarity: BTreeMap<String, i8>,
}

impl SentimentLexicon {
    pub fn polarity(&self, lower: &str) -> Option<i8> {
        self.polarity.get(lower).copied()
    }

    pub fn len(&self) -> usize {
        self.polarity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polarity.is_empty()
    }

    pub fn insert(&mut self, word: &str, polarity: i8) {
        self.polarity.insert(word.to_lowercase(), polarity.signum());
    }
}

/// Sentiment file: `word<TAB>+1|-1` per line.
pub fn load_sentiment_lexicon(path: &Path) -> Result<SentimentLexicon> {
    parse_sentiment(&source_name(path), &read(path)?)
}

pub fn builtin_sentiment_lexicon() -> SentimentLexicon {
    parse_sentiment("builtin sentiment_lexicon.txt", SENTIMENT_FILE)
        .expect("builtin sentiment file is well-formed")
}

fn parse_sentiment(source: &str, text: &str) -> Result<SentimentLexicon> {
    let mut lex = SentimentLexicon::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, val) = line.split_once('\t').ok_or_else(|| {
            CoreError::parse(source, idx + 1, "expected `word<TAB>polarity`")
        })?;
        let polarity = match val.trim() {
            "+1" | "1" => 1,
            "-1" => -1,
            other => {
                return Err(CoreError::parse(
                    source,
                    idx + 1,
                    format!("polarity must be +1 or -1, got `{other}`"),
                ))
            }
        };
        lex.polarity.insert(word.trim().to_lowercase(), polarity);
    }
    Ok(lex)
}

// ------------------------------------------------------- relation lexicon

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Synonym,
    Hyponym,
    Hypernym,
    Antonym,
}

impl Relation {
    pub fn parse(s: &str) -> Option<Relation> {
        Some(match s {
            "synonym" => Relation::Synonym,
            "hyponym" => Relation::Hyponym,
            "hypernym" => Relation::Hypernym,
            "antonym" => Relation::Antonym,
            _ => return None,
        })
    }
}

/// Word-relation graph. Neighbor lookup is undirected: an edge
/// `a|synonym|b` makes each word a neighbor of the other.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLexicon {
    neighbors: BTreeMap<String, BTreeSet<String>>,
}

impl RelationLexicon {
    pub fn add_edge(&mut self, a: &str, b: &str) {
        let a = a.to_lowercase();
        let b = b.to_lowercase();
        self.neighbors
            .entry(a.clone())
            .or_default()
            .insert(b.clone());
        self.neighbors.entry(b).or_default().insert(a);
    }

    pub fn neighbors(&self, word: &str) -> impl Iterator<Item = &str> {
        self.neighbors
            .get(word)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Relation file: `word|relation|word` per line.
pub fn load_relation_lexicon(path: &Path) -> Result<RelationLexicon> {
    parse_relations(&source_name(path), &read(path)?)
}

pub fn builtin_relation_lexicon() -> RelationLexicon {
    parse_relations("builtin relation_lexicon.txt", RELATIONS_FILE)
        .expect("builtin relation file is well-formed")
}

fn parse_relations(source: &str, text: &str) -> Result<RelationLexicon> {
    let mut lex = RelationLexicon::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('|');
        let (a, rel, b) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(rel), Some(b), None) => (a.trim(), rel.trim(), b.trim()),
            _ => {
                return Err(CoreError::parse(
                    source,
                    idx + 1,
                    "expected `word|relation|word`",
                ))
            }
        };
        if Relation::parse(rel).is_none() {
            return Err(CoreError::parse(
                source,
                idx + 1,
                format!("unknown relation `{rel}`"),
            ));
        }
        if a.is_empty() || b.is_empty() {
            return Err(CoreError::parse(source, idx + 1, "empty word field"));
        }
        lex.add_edge(a, b);
    }
    Ok(lex)
}

/// Union of the signature words and all their lexicon neighbors.
pub fn expand_terms(
    signatures: &[TopicSignature],
    lexicon: &RelationLexicon,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for sig in signatures {
        let word = sig.word.to_lowercase();
        for n in lexicon.neighbors(&word) {
            out.insert(n.to_string());
        }
        out.insert(word);
    }
    out
}

// ------------------------------------------------------------- gazetteer

/// Lowercased article-title set; membership is exact lowercased match.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    titles: BTreeSet<String>,
}

impl Gazetteer {
    pub fn from_titles<I: IntoIterator<Item = String>>(titles: I) -> Self {
        Gazetteer {
            titles: titles.into_iter().map(|t| t.to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, phrase_lower: &str) -> bool {
        self.titles.contains(phrase_lower)
    }

    pub fn len(&self) -> usize {
        self.titles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }
}

/// Gazetteer file: one title per line.
pub fn load_gazetteer(path: &Path) -> Result<Gazetteer> {
    Ok(parse_gazetteer(&read(path)?))
}

pub fn builtin_gazetteer() -> Gazetteer {
    parse_gazetteer(GAZETTEER_FILE)
}

fn parse_gazetteer(text: &str) -> Gazetteer {
    Gazetteer::from_titles(
        text.lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty() && !l.starts_with('#')),
    )
}

// ----------------------------------------------------------- word vectors

/// Dense word vectors; the dimension is fixed by the first vector read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVectors {
    dim: usize,
    table: BTreeMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        WordVectors {
            dim,
            table: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(CoreError::invalid(format!(
                "vector for `{word}` has dimension {}, table uses {}",
                vector.len(),
                self.dim
            )));
        }
        self.table.insert(word.to_lowercase(), vector);
        Ok(())
    }

    pub fn get(&self, lower: &str) -> Option<&[f64]> {
        self.table.get(lower).map(Vec::as_slice)
    }
}

/// Vector file: `word v1 v2 ... vd` per line, whitespace separated; the
/// first line fixes `d`.
pub fn load_word_vectors(path: &Path) -> Result<WordVectors> {
    parse_word_vectors(&source_name(path), &read(path)?)
}

fn parse_word_vectors(source: &str, text: &str) -> Result<WordVectors> {
    let mut vectors: Option<WordVectors> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    CoreError::parse(source, idx + 1, format!("bad number `{f}`"))
                })
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(CoreError::parse(source, idx + 1, "vector has no values"));
        }
        let table = vectors.get_or_insert_with(|| WordVectors::new(values.len()));
        if values.len() != table.dim {
            return Err(CoreError::parse(
                source,
                idx + 1,
                format!(
                    "vector has dimension {}, first line had {}",
                    values.len(),
                    table.dim
                ),
            ));
        }
        table.table.insert(word.to_lowercase(), values);
    }
    vectors.ok_or_else(|| CoreError::parse(source, 1, "empty vector file"))
}

//! Training-pair assembly under the encoder/decoder length caps.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::labels::{label_functions, pronoun_list, selection_labels, FunctionLabel};
use crate::config::PipelineConfig;
use crate::error::{CoreError, Result};
use crate::ranker::RankedPassage;
use crate::textproc::{
    extract_keyphrases, join_tokens, DiscourseMarker, Gazetteer, Keyphrase, Sentence, Tagger,
    Token, Tokenizer, WordVectors,
};

/// Separator token placed between concatenated passages.
pub const SEP_TOKEN: &str = "<sep>";

/// How close a sentence boundary must be to the cap for truncation to stop
/// there instead of cutting mid-sentence.
const BOUNDARY_SLACK: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub words: Vec<String>,
    pub surface: String,
}

/// One training example, fully tokenized and lowercased.
///
/// `selection[j]` is a bitmap over `memory` for gold sentence `j`.
/// `selection[0]` is always all-false: the first planner step consumes the
/// start marker, not memory entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub statement: Vec<String>,
    pub passages: Vec<String>,
    pub memory: Vec<MemoryEntry>,
    pub argument: Vec<Vec<String>>,
    pub labels: Vec<FunctionLabel>,
    pub selection: Vec<Vec<bool>>,
}

impl TrainingPair {
    pub fn argument_token_count(&self) -> usize {
        self.argument.iter().map(Vec::len).sum()
    }
}

/// Model input at inference time: the statement and passage streams plus
/// the keyphrase memory, built with the same caps and extraction as
/// training pairs but without a gold side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationInput {
    pub statement: Vec<String>,
    pub passages: Vec<String>,
    pub memory: Vec<MemoryEntry>,
}

/// Bundles the resources needed to turn pipeline output into pairs.
pub struct PairAssembler<'a> {
    pub tokenizer: &'a Tokenizer,
    pub tagger: &'a Tagger,
    pub gazetteer: &'a Gazetteer,
    pub vectors: &'a WordVectors,
    pub markers: &'a [DiscourseMarker],
    pub config: &'a PipelineConfig,
}

impl<'a> PairAssembler<'a> {
    /// Builds one pair, or `None` when the argument is empty after
    /// truncation (the caller reports the skip).
    pub fn assemble(
        &self,
        statement: &[Sentence],
        ranked: &[RankedPassage],
        gold: &[Sentence],
        stmt_signatures: &std::collections::BTreeSet<String>,
        arg_signatures: &std::collections::BTreeSet<String>,
        expanded_signatures: &std::collections::BTreeSet<String>,
    ) -> Result<Option<TrainingPair>> {
        let gold_trunc = truncate_sentences(gold, self.config.max_argument_tokens);
        if gold_trunc.iter().all(|s| s.tokens.is_empty()) {
            return Ok(None);
        }

        let labels = label_functions(
            &gold_trunc,
            stmt_signatures,
            arg_signatures,
            self.markers,
            pronoun_list(),
        )?;

        let (passage_tokens, retained) =
            concat_passages(ranked, self.config.max_passage_tokens);
        let memory = self.memory_from(&retained, expanded_signatures)?;
        let selection_sets = selection_labels(&memory, &gold_trunc);
        let selection = selection_sets
            .iter()
            .map(|set| {
                let mut bits = vec![false; memory.len()];
                for sel in set {
                    bits[sel.memory_index] = true;
                }
                bits
            })
            .collect();

        let statement_tokens: Vec<String> = statement
            .iter()
            .flat_map(|s| s.tokens.iter())
            .take(self.config.max_statement_tokens)
            .map(|t| t.lower.clone())
            .collect();

        Ok(Some(TrainingPair {
            statement: statement_tokens,
            passages: passage_tokens,
            memory: memory
                .into_iter()
                .map(|kp| MemoryEntry {
                    words: kp.words,
                    surface: kp.surface,
                })
                .collect(),
            argument: gold_trunc
                .iter()
                .map(|s| s.tokens.iter().map(|t| t.lower.clone()).collect())
                .collect(),
            labels,
            selection,
        }))
    }

    /// Builds the inference-side input for a statement and its ranked
    /// passages, mirroring `assemble` token for token.
    pub fn assemble_input(
        &self,
        statement: &[Sentence],
        ranked: &[RankedPassage],
        expanded_signatures: &std::collections::BTreeSet<String>,
    ) -> Result<GenerationInput> {
        let (passage_tokens, retained) =
            concat_passages(ranked, self.config.max_passage_tokens);
        let memory = self.memory_from(&retained, expanded_signatures)?;
        let statement_tokens: Vec<String> = statement
            .iter()
            .flat_map(|s| s.tokens.iter())
            .take(self.config.max_statement_tokens)
            .map(|t| t.lower.clone())
            .collect();
        Ok(GenerationInput {
            statement: statement_tokens,
            passages: passage_tokens,
            memory: memory
                .into_iter()
                .map(|kp| MemoryEntry {
                    words: kp.words,
                    surface: kp.surface,
                })
                .collect(),
        })
    }

    /// Keyphrase memory over the retained passage text, highest rank first.
    fn memory_from(
        &self,
        retained: &[Vec<Token>],
        expanded_signatures: &std::collections::BTreeSet<String>,
    ) -> Result<Vec<Keyphrase>> {
        let mut seen: std::collections::BTreeSet<Vec<String>> = Default::default();
        let mut memory = Vec::new();
        for tokens in retained {
            let mut sentences = self.tokenizer.split_sentences(&join_tokens(tokens));
            for s in &mut sentences {
                self.tagger.tag(&mut s.tokens);
            }
            for kp in extract_keyphrases(
                &sentences,
                expanded_signatures,
                self.gazetteer,
                self.vectors,
            )? {
                if seen.insert(kp.words.clone()) {
                    memory.push(kp);
                }
            }
        }
        Ok(memory)
    }
}

/// Truncates sentences to `cap` tokens total. When a sentence boundary
/// falls within `BOUNDARY_SLACK` tokens of the cap the cut happens there;
/// otherwise the final sentence is cut mid-way at exactly `cap`.
fn truncate_sentences(sentences: &[Sentence], cap: usize) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut used = 0;
    for sentence in sentences {
        let len = sentence.tokens.len();
        if used + len <= cap {
            out.push(sentence.clone());
            used += len;
            continue;
        }
        // The full sentence does not fit.
        let boundary_ok = cap.saturating_sub(used) < BOUNDARY_SLACK && used > 0;
        if !boundary_ok {
            let remaining = cap - used;
            if remaining > 0 {
                out.push(Sentence::new(sentence.tokens[..remaining].to_vec()));
            }
        }
        break;
    }
    out
}

/// Concatenates ranked passages with a separator token between them and
/// cuts once `cap` passage tokens have been emitted. Separators do not
/// count against the cap: two 250-token passages under a 400 cap keep 250
/// and 150 tokens plus one separator, 401 stream tokens in total. Returns
/// the token strings (lowercased) and each retained passage's contributed
/// tokens for keyphrase extraction.
fn concat_passages(ranked: &[RankedPassage], cap: usize) -> (Vec<String>, Vec<Vec<Token>>) {
    let mut tokens: Vec<String> = Vec::new();
    let mut retained: Vec<Vec<Token>> = Vec::new();
    let mut used = 0usize;
    for rp in ranked {
        let budget = cap - used;
        if budget == 0 {
            break;
        }
        let take = rp.passage.passage.tokens.len().min(budget);
        if take == 0 {
            continue;
        }
        if !tokens.is_empty() {
            tokens.push(SEP_TOKEN.to_string());
        }
        let contributed: Vec<Token> = rp.passage.passage.tokens[..take].to_vec();
        tokens.extend(contributed.iter().map(|t| t.lower.clone()));
        retained.push(contributed);
        used += take;
    }
    (tokens, retained)
}

/// Writes pairs as line-delimited JSON.
pub fn write_pairs<W: Write>(w: &mut W, pairs: &[TrainingPair]) -> Result<()> {
    for pair in pairs {
        let line = serde_json::to_string(pair)
            .map_err(|e| CoreError::invalid(format!("serializing pair: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads line-delimited pairs, reporting the failing line on error.
pub fn read_pairs(path: &Path) -> Result<Vec<TrainingPair>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: TrainingPair = serde_json::from_str(&line).map_err(|e| {
            CoreError::parse(path.display().to_string(), idx + 1, e.to_string())
        })?;
        pairs.push(pair);
    }
    Ok(pairs)
}

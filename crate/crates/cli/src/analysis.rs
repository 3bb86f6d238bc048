//! Statement analysis and the retrieval/ranking chains shared by the
//! `retrieve`, `rank`, `keyphrases`, `prep`, and `generate` subcommands.

use std::collections::BTreeSet;

use candela_core::config::PipelineConfig;
use candela_core::corpus::{formulate_queries, retrieve, Index, Passage, ScoredPassage};
use candela_core::dataprep::MemoryEntry;
use candela_core::ranker::{
    diversity_filter, merge_dedup, rank_passages, stance_filter, stance_score, RankKey,
    RankedPassage, StanceTargets,
};
use candela_core::textproc::{
    expand_terms, extract_keyphrases, topic_signatures, Keyphrase, Sentence, Token, TokenCounts,
    TopicSignature,
};
use candela_nn::beam::GenMemory;

use crate::errors::{CliError, Result};
use crate::resources::Resources;

/// Everything the ranking chain needs to know about one input statement.
pub struct StatementAnalysis {
    pub sentences: Vec<Sentence>,
    /// Topic-signature words of the statement against the background.
    pub signature_words: BTreeSet<String>,
    /// Signature words plus their relation-lexicon neighbors; the
    /// keyphrase extraction filter.
    pub expanded: BTreeSet<String>,
    /// Keyphrases of the statement itself; also the opinion targets.
    pub keyphrases: Vec<Keyphrase>,
    pub targets: StanceTargets,
    /// Stance of the statement toward its own keyphrases.
    pub stance_q: f64,
}

/// Splits into sentences and tags every token.
pub fn analyze_sentences(res: &Resources, text: &str) -> Vec<Sentence> {
    let mut sentences = res.tokenizer.split_sentences(text);
    for s in &mut sentences {
        res.tagger.tag(&mut s.tokens);
    }
    sentences
}

/// Content-word counts over a passage collection, the background for
/// log-likelihood-ratio signature tests.
pub fn background_counts<'a, I: IntoIterator<Item = &'a Passage>>(passages: I) -> TokenCounts {
    let mut bg = TokenCounts::new();
    for p in passages {
        bg.merge(&TokenCounts::from_tokens(&p.tokens));
    }
    bg
}

/// Signature list and word set for a token stream against a background.
pub fn signature_set(
    tokens: &[Token],
    background: &TokenCounts,
    threshold: f64,
) -> (Vec<TopicSignature>, BTreeSet<String>) {
    let fg = TokenCounts::from_tokens(tokens);
    let list = topic_signatures(&fg, background, threshold);
    let words = list.iter().map(|s| s.word.clone()).collect();
    (list, words)
}

pub fn flat_tokens(sentences: &[Sentence]) -> Vec<Token> {
    sentences
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect()
}

/// Analyzes one statement: signatures against `background`, keyphrases,
/// and stance targets. Rejects statements with no tokens.
pub fn analyze_statement(
    res: &Resources,
    config: &PipelineConfig,
    text: &str,
    background: &TokenCounts,
) -> Result<StatementAnalysis> {
    let sentences = analyze_sentences(res, text);
    let tokens = flat_tokens(&sentences);
    if tokens.is_empty() {
        return Err(CliError::input("statement contains no tokens"));
    }
    let (list, signature_words) = signature_set(&tokens, background, config.llr_threshold);
    let expanded = expand_terms(&list, &res.relations);
    let keyphrases = extract_keyphrases(&sentences, &expanded, &res.gazetteer, &res.vectors)?;
    let targets = StanceTargets::new(
        keyphrases.iter().map(|k| k.words.clone()).collect(),
        res.sentiment.clone(),
    );
    let stance_q = stance_score(&tokens, &targets);
    Ok(StatementAnalysis {
        sentences,
        signature_words,
        expanded,
        keyphrases,
        targets,
        stance_q,
    })
}

/// Runs every statement query against every medium (or one given medium)
/// and merges the per-(query, medium) top-k lists.
pub fn retrieve_merged(
    index: &Index,
    sentences: &[Sentence],
    topk: usize,
    medium: Option<&str>,
) -> Vec<ScoredPassage> {
    let queries = formulate_queries(sentences);
    let media: Vec<String> = match medium {
        Some(m) => vec![m.to_string()],
        None => {
            let set: BTreeSet<&str> = index.docs().iter().map(|p| p.medium.as_str()).collect();
            set.into_iter().map(str::to_string).collect()
        }
    };
    let mut batches = Vec::new();
    for query in &queries {
        for medium in &media {
            batches.push(retrieve(index, query, topk, medium));
        }
    }
    merge_dedup(batches)
}

/// The rank -> diversity -> stance chain, truncated to the configured
/// passage budget.
pub fn rank_chain(
    config: &PipelineConfig,
    stmt: &StatementAnalysis,
    retrieved: Vec<ScoredPassage>,
) -> Vec<RankedPassage> {
    let ranked = rank_passages(
        retrieved,
        &stmt.sentences,
        &stmt.keyphrases,
        &stmt.signature_words,
    );
    let kept = diversity_filter(ranked);
    let scored: Vec<RankedPassage> = kept
        .into_iter()
        .map(|mut rp| {
            rp.stance = stance_score(&rp.passage.passage.tokens, &stmt.targets);
            rp
        })
        .collect();
    let mut filtered = stance_filter(scored, stmt.stance_q, config.stance_threshold);
    filtered.truncate(config.final_passages);
    filtered
}

/// Wraps oracle-ordered passages in the ranked-passage schema the later
/// stages consume. The rank key stays at its default; `stance` carries the
/// oracle's stance score.
pub fn oracle_to_ranked(
    oracle: Vec<candela_core::ranker::OracleRanked>,
    budget: usize,
) -> Vec<RankedPassage> {
    oracle
        .into_iter()
        .take(budget)
        .map(|o| RankedPassage {
            passage: o.passage,
            key: RankKey::default(),
            stance: o.stance,
        })
        .collect()
}

/// Generation memory from assembled entries; `content` drops stopwords,
/// matching how coverage is counted.
pub fn build_memory(res: &Resources, entries: &[MemoryEntry]) -> Vec<GenMemory> {
    entries
        .iter()
        .map(|e| {
            let content: Vec<String> = e
                .words
                .iter()
                .filter(|w| !res.tokenizer.is_stopword(w))
                .cloned()
                .collect();
            GenMemory {
                words: e.words.clone(),
                content,
            }
        })
        .collect()
}

//! Flat pipeline configuration.
//!
//! One `key = value` file drives every stage; command-line flags override
//! file values, which override the defaults below. Unknown keys are
//! rejected so typos surface instead of silently using a default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Master seed; per-stage seeds are derived from it by stable hashing.
    pub seed: u64,

    // Corpus and retrieval.
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub retrieval_topk: usize,
    pub min_article_words: usize,
    pub min_passage_words: usize,
    pub window_sentences: usize,
    pub window_step: usize,

    // Keyphrases and ranking.
    pub llr_threshold: f64,
    pub stance_threshold: f64,
    pub final_passages: usize,

    // Training-pair caps.
    pub max_statement_tokens: usize,
    pub max_passage_tokens: usize,
    pub max_argument_tokens: usize,

    // Model.
    pub vocab_size: usize,
    pub hidden_size: usize,
    pub embed_size: usize,
    pub learning_rate: f64,
    pub accumulator_init: f64,
    pub clip_norm: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,

    // Decoding.
    pub beam_width: usize,
    pub max_sentences: usize,
    pub max_decode_tokens: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 13,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            retrieval_topk: 20,
            min_article_words: 50,
            min_passage_words: 50,
            window_sentences: 3,
            window_step: 2,
            llr_threshold: 10.83,
            stance_threshold: 5.0,
            final_passages: 10,
            max_statement_tokens: 500,
            max_passage_tokens: 400,
            max_argument_tokens: 120,
            vocab_size: 50_000,
            hidden_size: 512,
            embed_size: 300,
            learning_rate: 0.15,
            accumulator_init: 0.1,
            clip_norm: 2.0,
            dropout: 0.2,
            batch_size: 64,
            epochs: 50,
            patience: 3,
            beam_width: 5,
            max_sentences: 10,
            max_decode_tokens: 120,
        }
    }
}

impl PipelineConfig {
    /// Loads a `key = value` file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut config = PipelineConfig::default();
        config.apply_str(&path.display().to_string(), &text)?;
        Ok(config)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, source: &str, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CoreError::parse(source, idx + 1, "expected `key = value`")
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CoreError::parse(source, idx + 1, e.to_string()))?;
        }
        self.validate()
    }

    /// Sets one key from its string form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| CoreError::invalid(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "bm25_k1" => self.bm25_k1 = num(key, value)?,
            "bm25_b" => self.bm25_b = num(key, value)?,
            "retrieval_topk" => self.retrieval_topk = num(key, value)?,
            "min_article_words" => self.min_article_words = num(key, value)?,
            "min_passage_words" => self.min_passage_words = num(key, value)?,
            "window_sentences" => self.window_sentences = num(key, value)?,
            "window_step" => self.window_step = num(key, value)?,
            "llr_threshold" => self.llr_threshold = num(key, value)?,
            "stance_threshold" => self.stance_threshold = num(key, value)?,
            "final_passages" => self.final_passages = num(key, value)?,
            "max_statement_tokens" => self.max_statement_tokens = num(key, value)?,
            "max_passage_tokens" => self.max_passage_tokens = num(key, value)?,
            "max_argument_tokens" => self.max_argument_tokens = num(key, value)?,
            "vocab_size" => self.vocab_size = num(key, value)?,
            "hidden_size" => self.hidden_size = num(key, value)?,
            "embed_size" => self.embed_size = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "accumulator_init" => self.accumulator_init = num(key, value)?,
            "clip_norm" => self.clip_norm = num(key, value)?,
            "dropout" => self.dropout = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "beam_width" => self.beam_width = num(key, value)?,
            "max_sentences" => self.max_sentences = num(key, value)?,
            "max_decode_tokens" => self.max_decode_tokens = num(key, value)?,
            _ => return Err(CoreError::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CoreError::invalid(format!("`{name}` must be positive, got {v}")))
            }
        }
        positive("bm25_k1", self.bm25_k1)?;
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(CoreError::invalid("`bm25_b` must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(CoreError::invalid("`dropout` must lie in [0, 1)"));
        }
        positive("learning_rate", self.learning_rate)?;
        positive("accumulator_init", self.accumulator_init)?;
        positive("clip_norm", self.clip_norm)?;
        positive("llr_threshold", self.llr_threshold)?;
        for (name, v) in [
            ("retrieval_topk", self.retrieval_topk),
            ("window_sentences", self.window_sentences),
            ("window_step", self.window_step),
            ("hidden_size", self.hidden_size),
            ("embed_size", self.embed_size),
            ("batch_size", self.batch_size),
            ("beam_width", self.beam_width),
            ("max_sentences", self.max_sentences),
            ("max_decode_tokens", self.max_decode_tokens),
            ("vocab_size", self.vocab_size),
        ] {
            if v == 0 {
                return Err(CoreError::invalid(format!("`{name}` must be at least 1")));
            }
        }
        Ok(())
    }

    /// Serializes back to the `key = value` format, all keys, sorted order.
    pub fn to_config_string(&self) -> String {
        let mut pairs = vec![
            ("accumulator_init", self.accumulator_init.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("beam_width", self.beam_width.to_string()),
            ("bm25_b", self.bm25_b.to_string()),
            ("bm25_k1", self.bm25_k1.to_string()),
            ("clip_norm", self.clip_norm.to_string()),
            ("dropout", self.dropout.to_string()),
            ("embed_size", self.embed_size.to_string()),
            ("epochs", self.epochs.to_string()),
            ("final_passages", self.final_passages.to_string()),
            ("hidden_size", self.hidden_size.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("llr_threshold", self.llr_threshold.to_string()),
            ("max_argument_tokens", self.max_argument_tokens.to_string()),
            ("max_passage_tokens", self.max_passage_tokens.to_string()),
            ("max_sentences", self.max_sentences.to_string()),
            ("max_decode_tokens", self.max_decode_tokens.to_string()),
            ("max_statement_tokens", self.max_statement_tokens.to_string()),
            ("min_article_words", self.min_article_words.to_string()),
            ("min_passage_words", self.min_passage_words.to_string()),
            ("patience", self.patience.to_string()),
            ("retrieval_topk", self.retrieval_topk.to_string()),
            ("seed", self.seed.to_string()),
            ("stance_threshold", self.stance_threshold.to_string()),
            ("vocab_size", self.vocab_size.to_string()),
            ("window_sentences", self.window_sentences.to_string()),
            ("window_step", self.window_step.to_string()),
        ];
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Stable per-stage seed derived from the master seed and a stage name.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }
}

/// Derives a child seed from `seed` and a label via SHA-256.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

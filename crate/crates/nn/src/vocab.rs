//! Closed vocabulary: the most frequent training tokens plus the special
//! markers used by the decoders.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use candela_core::binio;
use candela_core::dataprep::TrainingPair;
use candela_core::{CoreError, Result};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const SEP: &str = "<sep>";
pub const START: &str = "<start>";
pub const EOS_SENTENCE: &str = "</s>";
pub const EOS_ARGUMENT: &str = "</arg>";

/// Specials occupy the first six ids in this order.
pub const SPECIALS: [&str; 6] = [PAD, UNK, SEP, START, EOS_SENTENCE, EOS_ARGUMENT];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn pad(&self) -> usize {
        0
    }
    pub fn unk(&self) -> usize {
        1
    }
    pub fn sep(&self) -> usize {
        2
    }
    pub fn start(&self) -> usize {
        3
    }
    pub fn eos_sentence(&self) -> usize {
        4
    }
    pub fn eos_argument(&self) -> usize {
        5
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(1)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    fn from_words(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocab { words, index }
    }

    /// Builds the vocabulary from training pairs: every statement, passage,
    /// and argument token counts. The `max_words` most frequent tokens are
    /// kept (ties alphabetical), after the six specials.
    pub fn build(pairs: &[TrainingPair], max_words: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(CoreError::invalid("vocabulary needs at least one pair"));
        }
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for pair in pairs {
            let streams = pair
                .statement
                .iter()
                .chain(pair.passages.iter())
                .chain(pair.argument.iter().flatten());
            for token in streams {
                if SPECIALS.contains(&token.as_str()) {
                    continue;
                }
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words: Vec<String> = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().take(max_words).map(|(w, _)| w.to_string()))
            .collect();
        Ok(Vocab::from_words(words))
    }

    /// Token ids for a slice of strings, with unknowns mapped to `<unk>`.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.words[i].clone()).collect()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_u64(w, self.words.len() as u64)?;
        for word in &self.words {
            binio::write_str(w, word)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let count = binio::read_u64(r)? as usize;
        let mut words = Vec::with_capacity(count);
        for _ in 0..count {
            words.push(binio::read_str(r, 1 << 20)?);
        }
        for (i, special) in SPECIALS.iter().enumerate() {
            if words.get(i).map(String::as_str) != Some(*special) {
                return Err(CoreError::invalid(format!(
                    "vocabulary missing special {special} at id {i}"
                )));
            }
        }
        Ok(Vocab::from_words(words))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use candela_core::synth::synth_pairs;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|w| w.to_string()).collect()
    }

    #[test]
    fn specials_sit_at_fixed_ids() {
        let pairs = synth_pairs(1, 4);
        let vocab = Vocab::build(&pairs, 100).unwrap();
        assert_eq!(vocab.word(vocab.pad()), PAD);
        assert_eq!(vocab.word(vocab.unk()), UNK);
        assert_eq!(vocab.word(vocab.sep()), SEP);
        assert_eq!(vocab.word(vocab.start()), START);
        assert_eq!(vocab.word(vocab.eos_sentence()), EOS_SENTENCE);
        assert_eq!(vocab.word(vocab.eos_argument()), EOS_ARGUMENT);
    }

    #[test]
    fn frequency_cutoff_keeps_most_frequent() {
        let pair = candela_core::dataprep::TrainingPair {
            statement: toks("common common common rare"),
            passages: toks("common mid mid"),
            memory: vec![],
            argument: vec![toks("common .")],
            labels: vec![candela_core::dataprep::FunctionLabel::Filler],
            selection: vec![vec![]],
        };
        let vocab = Vocab::build(&[pair], 2).unwrap();
        // Six specials + the two most frequent words.
        assert_eq!(vocab.len(), 8);
        assert!(vocab.contains("common"));
        assert!(vocab.contains("mid"));
        assert!(!vocab.contains("rare"));
        assert_eq!(vocab.id("rare"), vocab.unk());
    }

    #[test]
    fn literal_separator_in_passages_maps_to_special() {
        let pair = candela_core::dataprep::TrainingPair {
            statement: toks("a"),
            passages: toks("a <sep> b"),
            memory: vec![],
            argument: vec![toks("a .")],
            labels: vec![candela_core::dataprep::FunctionLabel::Filler],
            selection: vec![vec![]],
        };
        let vocab = Vocab::build(&[pair], 10).unwrap();
        assert_eq!(vocab.id("<sep>"), 2);
        // The separator is not double-counted as a regular word.
        assert_eq!(
            vocab.words.iter().filter(|w| w.as_str() == SEP).count(),
            1
        );
    }

    #[test]
    fn roundtrip_and_special_check() {
        let pairs = synth_pairs(2, 3);
        let vocab = Vocab::build(&pairs, 50).unwrap();
        let mut buf = Vec::new();
        vocab.write_to(&mut buf).unwrap();
        let back = Vocab::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(vocab, back);

        // A stream missing the specials is rejected.
        let mut bad = Vec::new();
        binio::write_u64(&mut bad, 1).unwrap();
        binio::write_str(&mut bad, "word").unwrap();
        assert!(Vocab::read_from(&mut bad.as_slice()).is_err());
    }

    #[test]
    fn encode_decode_are_inverse_for_known_tokens() {
        let pairs = synth_pairs(3, 5);
        let vocab = Vocab::build(&pairs, 100).unwrap();
        // Every synthetic pair contains these template words.
        let tokens = toks("the say matter wrong .");
        let ids = vocab.encode(&tokens);
        assert_eq!(vocab.decode(&ids), tokens);
    }
}

//! Rule-based tokenizer and sentence splitter.
//!
//! Splits on whitespace, peels punctuation off chunk edges, and applies the
//! usual English contraction splits (`don't` -> `do n't`, `it's` -> `it 's`).
//! Abbreviation-final periods (`Mr.`) and dotted acronyms (`U.S.`) stay
//! attached to their word, which is also what keeps the sentence splitter
//! from breaking after them.

use std::collections::HashSet;

use super::{Sentence, Token};

const STOPWORDS_FILE: &str = include_str!("../../data/stopwords.txt");
const ABBREVIATIONS_FILE: &str = include_str!("../../data/abbreviations.txt");

/// The abbreviation set behind `Tokenizer::builtin`.
pub fn builtin_abbreviations() -> HashSet<String> {
    ABBREVIATIONS_FILE
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Sentence-final punctuation tokens.
const TERMINATORS: &[&str] = &[".", "!", "?", "..."];
/// Tokens that may trail a terminator while belonging to the same sentence.
const CLOSERS: &[&str] = &[
    "\"", "'", "''", "\u{2019}", "\u{201d}", ")", "]", "}",
];

pub struct Tokenizer {
    stopwords: HashSet<String>,
    abbreviations: HashSet<String>,
}

impl Tokenizer {
    pub fn new(stopwords: HashSet<String>, abbreviations: HashSet<String>) -> Self {
        Tokenizer {
            stopwords,
            abbreviations,
        }
    }

    /// Tokenizer backed by the data files shipped with this crate.
    pub fn builtin() -> Self {
        let stopwords = STOPWORDS_FILE
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        Tokenizer::new(stopwords, builtin_abbreviations())
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn is_stopword(&self, lower: &str) -> bool {
        self.stopwords.contains(lower)
    }

    /// Tokenizes text into surface tokens. Empty input yields an empty list.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        for chunk in text.split_whitespace() {
            self.split_chunk(chunk, &mut out);
        }
        out
    }

    /// Splits text into sentences. Boundaries fall after `.`, `!`, `?` (and
    /// `...`) unless the period belongs to a known abbreviation or dotted
    /// acronym, in which case the tokenizer never emits a bare period there.
    pub fn split_sentences(&self, text: &str) -> Vec<Sentence> {
        let tokens = self.tokenize(text);
        let mut sentences = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        let mut iter = tokens.into_iter().peekable();
        while let Some(tok) = iter.next() {
            let is_term = TERMINATORS.contains(&tok.surface.as_str());
            current.push(tok);
            if is_term {
                // Closing quotes and brackets stay with the sentence they end.
                while let Some(next) = iter.peek() {
                    if CLOSERS.contains(&next.surface.as_str()) {
                        current.push(iter.next().unwrap());
                    } else {
                        break;
                    }
                }
                sentences.push(Sentence::new(std::mem::take(&mut current)));
            }
        }
        if !current.is_empty() {
            sentences.push(Sentence::new(current));
        }
        sentences
    }

    fn make_token(&self, surface: &str) -> Token {
        let lower = surface.to_lowercase();
        let is_word = surface.chars().any(|c| c.is_alphanumeric());
        let is_content = is_word && !self.stopwords.contains(&lower);
        Token {
            surface: surface.to_string(),
            lower,
            pos: None,
            is_content,
        }
    }

    fn split_chunk(&self, chunk: &str, out: &mut Vec<Token>) {
        let mut chars: Vec<char> = chunk.chars().collect();

        // Leading punctuation peels off one character at a time, except an
        // ellipsis which stays whole so tokenization is stable under
        // re-tokenizing joined output.
        let mut lead = 0;
        while lead < chars.len() && !chars[lead].is_alphanumeric() && chars.len() - lead > 1 {
            if chars[lead..].starts_with(&['.', '.', '.']) {
                out.push(self.make_token("..."));
                lead += 3;
                continue;
            }
            // An apostrophe that starts a contraction-like suffix ('em, 'tis)
            // stays put; edge quotes split.
            if (chars[lead] == '\'' || chars[lead] == '\u{2019}') && lead + 1 < chars.len() {
                break;
            }
            out.push(self.make_token(&chars[lead].to_string()));
            lead += 1;
        }
        chars.drain(..lead);
        if chars.is_empty() {
            return;
        }

        // Trailing punctuation, collected in reverse.
        let mut tail: Vec<String> = Vec::new();
        loop {
            let s: String = chars.iter().collect();
            if chars.len() <= 1 || chars.last().is_none_or(|c| c.is_alphanumeric()) {
                break;
            }
            if s.ends_with("...") {
                tail.push("...".to_string());
                chars.truncate(chars.len() - 3);
                continue;
            }
            if s.ends_with('.') && self.keeps_final_period(&s) {
                break;
            }
            tail.push(chars.pop().unwrap().to_string());
        }

        if !chars.is_empty() {
            let trunk: String = chars.iter().collect();
            for piece in split_contractions(&trunk) {
                out.push(self.make_token(&piece));
            }
        }
        for t in tail.into_iter().rev() {
            out.push(self.make_token(&t));
        }
    }

    /// True when `word.` should remain a single token: a listed abbreviation
    /// or a dotted acronym like `U.S.` or `e.g.`.
    fn keeps_final_period(&self, s: &str) -> bool {
        let base = &s[..s.len() - 1];
        if base.is_empty() {
            return false;
        }
        if self.abbreviations.contains(&base.to_lowercase()) {
            return true;
        }
        is_dotted_acronym(s)
    }
}

/// Dotted acronym: alternating single letters and periods, e.g. `U.S.`.
fn is_dotted_acronym(s: &str) -> bool {
    if !s.contains('.') {
        return false;
    }
    let trimmed = s.strip_suffix('.').unwrap_or(s);
    if trimmed.is_empty() {
        return false;
    }
    trimmed.split('.').all(|part| {
        part.chars().count() == 1 && part.chars().all(|c| c.is_alphabetic())
    })
}

/// Standard English contraction splits on a whitespace-delimited trunk.
fn split_contractions(trunk: &str) -> Vec<String> {
    let lower = trunk.to_lowercase();
    match lower.as_str() {
        "cannot" => return split_at(trunk, 3),
        "gonna" | "wanna" | "gotta" => return split_at(trunk, 3),
        _ => {}
    }

    let n = trunk.chars().count();
    if n > 3 && (lower.ends_with("n't") || lower.ends_with("n\u{2019}t")) {
        return split_at(trunk, n - 3);
    }
    for suffix in ["'ll", "'re", "'ve", "\u{2019}ll", "\u{2019}re", "\u{2019}ve"] {
        if lower.ends_with(suffix) && n > 3 {
            return split_at(trunk, n - 3);
        }
    }
    for suffix in ["'s", "'d", "'m", "\u{2019}s", "\u{2019}d", "\u{2019}m"] {
        if lower.ends_with(suffix) && n > 2 {
            return split_at(trunk, n - 2);
        }
    }
    vec![trunk.to_string()]
}

fn split_at(s: &str, char_idx: usize) -> Vec<String> {
    let byte_idx = s
        .char_indices()
        .nth(char_idx)
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    vec![s[..byte_idx].to_string(), s[byte_idx..].to_string()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn splits_punctuation_from_words() {
        let tk = Tokenizer::builtin();
        assert_eq!(
            surfaces(&tk.tokenize("Gun control works.")),
            vec!["Gun", "control", "works", "."]
        );
    }

    #[test]
    fn empty_input_yields_empty_list() {
        let tk = Tokenizer::builtin();
        assert!(tk.tokenize("").is_empty());
        assert!(tk.split_sentences("").is_empty());
    }

    #[test]
    fn contraction_splits() {
        let tk = Tokenizer::builtin();
        assert_eq!(surfaces(&tk.tokenize("don't")), vec!["do", "n't"]);
        assert_eq!(surfaces(&tk.tokenize("can't")), vec!["ca", "n't"]);
        assert_eq!(surfaces(&tk.tokenize("It's")), vec!["It", "'s"]);
        assert_eq!(surfaces(&tk.tokenize("cannot")), vec!["can", "not"]);
    }

    #[test]
    fn abbreviations_keep_their_period() {
        let tk = Tokenizer::builtin();
        assert_eq!(
            surfaces(&tk.tokenize("Mr. Smith left.")),
            vec!["Mr.", "Smith", "left", "."]
        );
        assert_eq!(surfaces(&tk.tokenize("the U.S. army")), vec!["the", "U.S.", "army"]);
    }

    #[test]
    fn each_terminator_ends_a_sentence() {
        let tk = Tokenizer::builtin();
        let sents = tk.split_sentences("He won. She lost? They tied!");
        assert_eq!(sents.len(), 3);
        assert!(!sents[0].is_question);
        assert!(sents[1].is_question);
    }

    #[test]
    fn dotted_initial_does_not_split() {
        // Single letters with periods read as initials (John F. Kennedy),
        // so they keep their period and no boundary is inserted.
        let tk = Tokenizer::builtin();
        let sents = tk.split_sentences("John F. Kennedy spoke.");
        assert_eq!(sents.len(), 1);
    }

    #[test]
    fn abbreviation_does_not_split_sentence() {
        let tk = Tokenizer::builtin();
        let sents = tk.split_sentences("Mr. Smith left.");
        assert_eq!(sents.len(), 1);
    }

    #[test]
    fn question_flag_sees_past_quotes() {
        let tk = Tokenizer::builtin();
        let sents = tk.split_sentences("Did he say \"stop\"?");
        assert_eq!(sents.len(), 1);
        assert!(sents[0].is_question);
        let sents = tk.split_sentences("He said \"stop?\"");
        assert!(sents[0].is_question);
    }

    #[test]
    fn content_flags_follow_stopword_list() {
        let tk = Tokenizer::builtin();
        let tokens = tk.tokenize("the penalty , clearly");
        assert!(!tokens[0].is_content); // stopword
        assert!(tokens[1].is_content);
        assert!(!tokens[2].is_content); // punctuation
        assert!(tokens[3].is_content);
    }

    #[test]
    fn retokenizing_joined_output_is_stable() {
        let tk = Tokenizer::builtin();
        for text in [
            "Mr. Smith can't pay the $5 fee... (really?)",
            "\"Quoted words,\" she said.",
            "don't won't it's we're I'm",
        ] {
            let once = tk.tokenize(text);
            let joined = crate::textproc::join_tokens(&once);
            let twice = tk.tokenize(&joined);
            assert_eq!(surfaces(&once), surfaces(&twice), "input: {text}");
        }
    }
}

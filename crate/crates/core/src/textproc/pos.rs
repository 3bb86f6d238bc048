//! Lexicon-plus-suffix part-of-speech tagger.
//!
//! Lookup order: lexicon, non-word check, digit shapes, suffix rules, then a
//! noun default. Pre-tagged text can be supplied as a sidecar file whose tags
//! are applied verbatim.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Token;
use crate::error::{CoreError, Result};

const POS_LEXICON_FILE: &str = include_str!("../../data/pos_lexicon.txt");

/// Tag set used by the chunking grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pos {
    /// Determiner.
    Dt,
    /// Possessive pronoun (`my`, `their`).
    PpDollar,
    /// Adjective.
    Jj,
    /// Comparative adjective.
    Jjr,
    /// Singular or mass noun.
    Nn,
    /// Plural noun.
    Nns,
    /// Proper noun.
    Nnp,
    /// Cardinal number.
    Cd,
    /// Preposition or subordinating conjunction.
    In,
    /// Modal verb.
    Md,
    /// Verb, base form.
    Vb,
    /// Verb, past tense.
    Vbd,
    /// Verb, gerund.
    Vbg,
    /// Verb, past participle.
    Vbn,
    /// Verb, non-3rd-person present.
    Vbp,
    /// Verb, 3rd-person singular present.
    Vbz,
    /// Everything else (punctuation, adverbs, pronouns, ...).
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Dt => "DT",
            Pos::PpDollar => "PP$",
            Pos::Jj => "JJ",
            Pos::Jjr => "JJR",
            Pos::Nn => "NN",
            Pos::Nns => "NNS",
            Pos::Nnp => "NNP",
            Pos::Cd => "CD",
            Pos::In => "IN",
            Pos::Md => "MD",
            Pos::Vb => "VB",
            Pos::Vbd => "VBD",
            Pos::Vbg => "VBG",
            Pos::Vbn => "VBN",
            Pos::Vbp => "VBP",
            Pos::Vbz => "VBZ",
            Pos::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<Pos> {
        Some(match s {
            "DT" => Pos::Dt,
            "PP$" => Pos::PpDollar,
            "JJ" => Pos::Jj,
            "JJR" => Pos::Jjr,
            "NN" => Pos::Nn,
            "NNS" => Pos::Nns,
            "NNP" => Pos::Nnp,
            "CD" => Pos::Cd,
            "IN" => Pos::In,
            "MD" => Pos::Md,
            "VB" => Pos::Vb,
            "VBD" => Pos::Vbd,
            "VBG" => Pos::Vbg,
            "VBN" => Pos::Vbn,
            "VBP" => Pos::Vbp,
            "VBZ" => Pos::Vbz,
            "OTHER" => Pos::Other,
            _ => return None,
        })
    }

    /// Noun-family tags (`NN.*` in the chunking grammar).
    pub fn is_noun(self) -> bool {
        matches!(self, Pos::Nn | Pos::Nns | Pos::Nnp)
    }

    /// Verb-family tags (`VB.*` in the chunking grammar).
    pub fn is_verb(self) -> bool {
        matches!(
            self,
            Pos::Vb | Pos::Vbd | Pos::Vbg | Pos::Vbn | Pos::Vbp | Pos::Vbz
        )
    }
}

#[derive(Debug)]
pub struct Tagger {
    lexicon: HashMap<String, Pos>,
}

impl Tagger {
    pub fn new(lexicon: HashMap<String, Pos>) -> Self {
        Tagger { lexicon }
    }

    /// Loads a tab-separated `word<TAB>TAG` lexicon file.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CoreError::Io)?;
        let source = path.display().to_string();
        let mut lexicon = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| {
                CoreError::parse(source.clone(), idx + 1, "missing tab separator")
            })?;
            let pos = Pos::parse(tag.trim()).ok_or_else(|| {
                CoreError::parse(source.clone(), idx + 1, format!("unknown tag {tag:?}"))
            })?;
            lexicon.insert(word.trim().to_string(), pos);
        }
        Ok(Tagger::new(lexicon))
    }

    /// Tagger backed by the lexicon shipped with this crate.
    pub fn builtin() -> Self {
        let mut lexicon = HashMap::new();
        for (idx, line) in POS_LEXICON_FILE.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .unwrap_or_else(|| panic!("pos_lexicon.txt:{}: missing tab", idx + 1));
            let pos = Pos::parse(tag.trim())
                .unwrap_or_else(|| panic!("pos_lexicon.txt:{}: bad tag {tag}", idx + 1));
            lexicon.insert(word.trim().to_string(), pos);
        }
        Tagger::new(lexicon)
    }

    pub fn tag_word(&self, token: &Token) -> Pos {
        if let Some(&pos) = self.lexicon.get(&token.lower) {
            return pos;
        }
        if !token.is_word() {
            return Pos::Other;
        }
        if is_number(&token.surface) {
            return Pos::Cd;
        }
        // Capitalized unknown words read as proper nouns.
        if token
            .surface
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase())
        {
            return Pos::Nnp;
        }
        suffix_tag(&token.lower)
    }

    /// Fills `pos` on every token.
    pub fn tag(&self, tokens: &mut [Token]) {
        for tok in tokens.iter_mut() {
            tok.pos = Some(self.tag_word(tok));
        }
    }
}

/// Suffix rules for unknown lowercase words.
fn suffix_tag(lower: &str) -> Pos {
    if lower.ends_with("ing") && lower.len() > 4 {
        return Pos::Vbg;
    }
    if lower.ends_with("ed") && lower.len() > 3 {
        return Pos::Vbd;
    }
    if lower.ends_with("ly") && lower.len() > 3 {
        return Pos::Other;
    }
    for suf in ["able", "ible", "ous", "ful", "ive", "ic", "al"] {
        if lower.ends_with(suf) && lower.len() > suf.len() + 1 {
            return Pos::Jj;
        }
    }
    if lower.ends_with("er") && lower.len() > 4 {
        return Pos::Jjr;
    }
    if lower.ends_with('s') && !lower.ends_with("ss") && lower.len() > 3 {
        return Pos::Nns;
    }
    Pos::Nn
}

fn is_number(surface: &str) -> bool {
    let mut saw_digit = false;
    for c in surface.chars() {
        if c.is_ascii_digit() {
            saw_digit = true;
        } else if !matches!(c, '.' | ',' | '-' | '/' | '%') {
            return false;
        }
    }
    saw_digit
}

/// Tags every token in-place with the builtin tagger.
pub fn pos_tag(tokens: &mut [Token], tagger: &Tagger) {
    tagger.tag(tokens);
}

/// One sidecar entry: a token surface and its tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidecarEntry {
    pub surface: String,
    pub pos: Pos,
}

/// Parses a pre-tagged sidecar: one `surface<TAB>tag` line per token, blank
/// line between sentences. Returns a flat token stream.
pub fn parse_sidecar(source_name: &str, text: &str) -> Result<Vec<SidecarEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (surface, tag) = line.split_once('\t').ok_or_else(|| {
            CoreError::parse(source_name, line_no, "expected `surface<TAB>tag`")
        })?;
        let surface = surface.trim();
        if surface.is_empty() {
            return Err(CoreError::parse(source_name, line_no, "empty surface"));
        }
        let pos = Pos::parse(tag.trim()).ok_or_else(|| {
            CoreError::parse(source_name, line_no, format!("unknown tag `{}`", tag.trim()))
        })?;
        entries.push(SidecarEntry {
            surface: surface.to_string(),
            pos,
        });
    }
    Ok(entries)
}

/// Overrides token tags with sidecar tags, position by position. Surfaces
/// must match; a mismatch reports the token index.
pub fn apply_sidecar(tokens: &mut [Token], entries: &[SidecarEntry]) -> Result<()> {
    if tokens.len() != entries.len() {
        return Err(CoreError::invalid(format!(
            "sidecar has {} entries but text has {} tokens",
            entries.len(),
            tokens.len()
        )));
    }
    for (i, (tok, entry)) in tokens.iter_mut().zip(entries).enumerate() {
        if tok.surface != entry.surface {
            return Err(CoreError::invalid(format!(
                "sidecar token {} is `{}` but text has `{}`",
                i, entry.surface, tok.surface
            )));
        }
        tok.pos = Some(entry.pos);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::Tokenizer;

    fn tagged(text: &str) -> Vec<(String, Pos)> {
        let tk = Tokenizer::builtin();
        let tagger = Tagger::builtin();
        let mut tokens = tk.tokenize(text);
        tagger.tag(&mut tokens);
        tokens
            .into_iter()
            .map(|t| (t.surface.clone(), t.pos.unwrap()))
            .collect()
    }

    #[test]
    fn lexicon_lookup_wins() {
        let tags = tagged("the dog");
        assert_eq!(tags[0].1, Pos::Dt);
        assert_eq!(tags[1].1, Pos::Nn);
    }

    #[test]
    fn unknown_plural_gets_nns() {
        let tags = tagged("blorps");
        assert_eq!(tags[0].1, Pos::Nns);
    }

    #[test]
    fn numbers_and_punctuation() {
        let tags = tagged("5 , 3.5");
        assert_eq!(tags[0].1, Pos::Cd);
        assert_eq!(tags[1].1, Pos::Other);
        assert_eq!(tags[2].1, Pos::Cd);
    }

    #[test]
    fn suffix_rules() {
        let tags = tagged("zorbing zorbed zorbful");
        assert_eq!(tags[0].1, Pos::Vbg);
        assert_eq!(tags[1].1, Pos::Vbd);
        assert_eq!(tags[2].1, Pos::Jj);
    }

    #[test]
    fn capitalized_unknown_is_proper_noun() {
        let tags = tagged("visit Zorbistan");
        assert_eq!(tags[1].1, Pos::Nnp);
    }

    #[test]
    fn sidecar_overrides_lexicon() {
        let tk = Tokenizer::builtin();
        let mut tokens = tk.tokenize("dog");
        let entries = parse_sidecar("test", "dog\tVB\n").unwrap();
        apply_sidecar(&mut tokens, &entries).unwrap();
        assert_eq!(tokens[0].pos, Some(Pos::Vb));
    }

    #[test]
    fn sidecar_rejects_bad_lines_with_line_number() {
        let err = parse_sidecar("side.tsv", "dog\tVB\nno-tab-here\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("side.tsv:2"), "got: {msg}");

        let err = parse_sidecar("side.tsv", "dog\tNOPE\n").unwrap_err();
        assert!(err.to_string().contains("side.tsv:1"));
    }

    #[test]
    fn sidecar_rejects_surface_mismatch() {
        let tk = Tokenizer::builtin();
        let mut tokens = tk.tokenize("cat");
        let entries = parse_sidecar("test", "dog\tNN\n").unwrap();
        assert!(apply_sidecar(&mut tokens, &entries).is_err());
    }

    #[test]
    fn tag_roundtrip_through_strings() {
        for pos in [
            Pos::Dt,
            Pos::PpDollar,
            Pos::Jj,
            Pos::Jjr,
            Pos::Nn,
            Pos::Nns,
            Pos::Nnp,
            Pos::Cd,
            Pos::In,
            Pos::Md,
            Pos::Vb,
            Pos::Vbd,
            Pos::Vbg,
            Pos::Vbn,
            Pos::Vbp,
            Pos::Vbz,
            Pos::Other,
        ] {
            assert_eq!(Pos::parse(pos.as_str()), Some(pos));
        }
    }

    #[test]
    fn lexicon_file_roundtrips_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("lex.txt");
        std::fs::write(&good, "# comment\nquick\tJJ\nrun\tVB\n").unwrap();
        let tagger = Tagger::from_file(&good).unwrap();
        let mut tokens = Tokenizer::builtin().tokenize("quick run");
        tagger.tag(&mut tokens);
        assert_eq!(tokens[0].pos, Some(Pos::Jj));
        assert_eq!(tokens[1].pos, Some(Pos::Vb));

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "quick JJ\n").unwrap();
        let err = Tagger::from_file(&bad).unwrap_err();
        assert!(err.to_string().contains(":1:"), "{err}");

        let bad_tag = dir.path().join("badtag.txt");
        std::fs::write(&bad_tag, "quick\tZZ\n").unwrap();
        assert!(Tagger::from_file(&bad_tag).is_err());
    }
}

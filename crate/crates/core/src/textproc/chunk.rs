//! Pattern-based phrase chunker.
//!
//! Three rules are applied in a cascade, each pass leftmost-longest:
//!
//! ```text
//! NP: (DT|PP$)? (JJ|JJR)* (NN*|CD|JJ)+
//! PP: IN NP
//! VP: MD? VB* (NP|PP)
//! ```
//!
//! Candidates are the top-level matches: VPs plus NPs not absorbed into a PP
//! or VP. A PP is only ever part of a VP; on its own it yields nothing.

use serde::{Deserialize, Serialize};

use super::pos::Pos;
use super::Token;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhraseKind {
    Np,
    Vp,
}

/// Half-open token span `[start, end)` matched by one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkSpan {
    pub start: usize,
    pub end: usize,
    pub kind: PhraseKind,
}

impl ChunkSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

fn is_np_head(pos: Pos) -> bool {
    pos.is_noun() || matches!(pos, Pos::Cd | Pos::Jj)
}

fn is_np_adj(pos: Pos) -> bool {
    matches!(pos, Pos::Jj | Pos::Jjr)
}

/// Longest NP match starting exactly at `i`, or None.
fn match_np(tags: &[Pos], i: usize) -> Option<usize> {
    let mut j = i;
    if j < tags.len() && matches!(tags[j], Pos::Dt | Pos::PpDollar) {
        j += 1;
    }
    let adj_start = j;
    while j < tags.len() && is_np_adj(tags[j]) {
        j += 1;
    }
    let adj_end = j;
    while j < tags.len() && is_np_head(tags[j]) {
        j += 1;
    }
    if j > adj_end {
        return Some(j);
    }
    // No head tokens follow the adjective run. The run itself can still end
    // the match if its tail is a JJ, which the head part may claim instead.
    let mut q = adj_end;
    while q > adj_start {
        if tags[q - 1] == Pos::Jj {
            return Some(q);
        }
        q -= 1;
    }
    None
}

/// Tags for all tokens, or an error naming the first untagged one.
fn require_tags(tokens: &[Token]) -> Result<Vec<Pos>> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.pos.ok_or_else(|| {
                CoreError::invalid(format!("token {} (`{}`) is untagged", i, t.surface))
            })
        })
        .collect()
}

/// Runs the NP/PP/VP cascade and returns candidate spans in text order.
pub fn chunk_candidates(tokens: &[Token]) -> Result<Vec<ChunkSpan>> {
    let tags = require_tags(tokens)?;
    let n = tags.len();

    // NP pass: leftmost-longest, non-overlapping.
    let mut nps: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        match match_np(&tags, i) {
            Some(end) => {
                nps.push((i, end));
                i = end;
            }
            None => i += 1,
        }
    }
    // NP start index -> slot in `nps`.
    let np_at = |start: usize| nps.iter().position(|&(s, _)| s == start);

    // PP pass: IN immediately followed by an NP absorbs it.
    let mut np_in_pp = vec![false; nps.len()];
    let mut pps: Vec<(usize, usize)> = Vec::new(); // (IN index, end)
    for (slot, &(np_start, np_end)) in nps.iter().enumerate() {
        if np_start > 0 && tags[np_start - 1] == Pos::In {
            np_in_pp[slot] = true;
            pps.push((np_start - 1, np_end));
        }
    }
    let pp_at = |start: usize| pps.iter().position(|&(s, _)| s == start);

    // VP pass: optional modal, verb, then the NP or PP starting right after.
    // Verb object lookup: PP or free NP starting at `pos`, returning its end.
    let object_end = |pos: usize, np_in_pp: &[bool]| -> Option<(usize, Option<usize>)> {
        if let Some(pp_slot) = pp_at(pos) {
            return Some((pps[pp_slot].1, None));
        }
        if let Some(np_slot) = np_at(pos) {
            if !np_in_pp[np_slot] {
                return Some((nps[np_slot].1, Some(np_slot)));
            }
        }
        None
    };

    let mut np_in_vp = vec![false; nps.len()];
    let mut vps: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let verb_idx = if tags[i] == Pos::Md && i + 1 < n && tags[i + 1].is_verb() {
            i + 1
        } else if tags[i].is_verb() {
            i
        } else {
            i += 1;
            continue;
        };
        match object_end(verb_idx + 1, &np_in_pp) {
            Some((end, np_slot)) => {
                if let Some(slot) = np_slot {
                    np_in_vp[slot] = true;
                }
                vps.push((i, end));
                i = end;
            }
            None => i += 1,
        }
    }

    let mut out: Vec<ChunkSpan> = Vec::new();
    for (slot, &(start, end)) in nps.iter().enumerate() {
        if !np_in_pp[slot] && !np_in_vp[slot] {
            out.push(ChunkSpan {
                start,
                end,
                kind: PhraseKind::Np,
            });
        }
    }
    for &(start, end) in &vps {
        out.push(ChunkSpan {
            start,
            end,
            kind: PhraseKind::Vp,
        });
    }
    out.sort_by_key(|s| (s.start, s.end));
    Ok(out)
}

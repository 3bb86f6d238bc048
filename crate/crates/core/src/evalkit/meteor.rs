//! METEOR-lite: unigram alignment by exact then stemmed match, recall-
//! weighted harmonic mean, and the standard fragmentation penalty.
//!
//! The full metric's synonym and paraphrase stages are omitted; scores are
//! labeled meteor_lite everywhere so they are not mistaken for the full
//! metric.

use crate::error::{CoreError, Result};

/// Deterministic suffix stripper used for the stem-match stage. Rules are
/// ordered; only the first applicable rule fires.
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    let n = w.len();
    if n > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..n - 3]);
    }
    if n > 4
        && (w.ends_with("ses")
            || w.ends_with("xes")
            || w.ends_with("zes")
            || w.ends_with("ches")
            || w.ends_with("shes"))
    {
        return w[..n - 2].to_string();
    }
    if n > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return w[..n - 1].to_string();
    }
    if n > 5 && w.ends_with("ing") {
        return w[..n - 3].to_string();
    }
    if n > 4 && w.ends_with("ed") {
        return w[..n - 2].to_string();
    }
    if n > 4 && w.ends_with("ly") {
        return w[..n - 2].to_string();
    }
    w
}

/// Greedy two-stage alignment. Stage one pairs identical tokens, stage two
/// pairs stem-equal tokens; each stage scans the hypothesis left to right
/// and takes the first unused reference position.
fn align(hyp: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut ref_used = vec![false; reference.len()];
    let mut matched: Vec<Option<usize>> = vec![None; hyp.len()];

    for (i, h) in hyp.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            if !ref_used[j] && h == r {
                matched[i] = Some(j);
                ref_used[j] = true;
                break;
            }
        }
    }
    let ref_stems: Vec<String> = reference.iter().map(|r| stem(r)).collect();
    for (i, h) in hyp.iter().enumerate() {
        if matched[i].is_some() {
            continue;
        }
        let hs = stem(h);
        for (j, rs) in ref_stems.iter().enumerate() {
            if !ref_used[j] && &hs == rs {
                matched[i] = Some(j);
                ref_used[j] = true;
                break;
            }
        }
    }
    matched
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (i, j)))
        .collect()
}

/// Counts maximal runs of alignments that are contiguous and in order on
/// both sides.
fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in pairs {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

/// F-mean with recall weight 9, scaled by 1 - 0.5 * (chunks/matches)^3.
pub fn meteor_lite(hyp: &[String], reference: &[String]) -> Result<f64> {
    if reference.is_empty() {
        return Err(CoreError::invalid("meteor_lite: empty reference"));
    }
    if hyp.is_empty() {
        return Ok(0.0);
    }
    let pairs = align(hyp, reference);
    let m = pairs.len() as f64;
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let precision = m / hyp.len() as f64;
    let recall = m / reference.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let chunks = chunk_count(&pairs) as f64;
    let penalty = 0.5 * (chunks / m).powi(3);
    Ok(f_mean * (1.0 - penalty))
}

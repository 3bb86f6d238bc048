//! Paired two-sided randomization test for comparing per-pair metric
//! scores from two systems.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// Number of sign permutations used by default.
pub const DEFAULT_PERMUTATIONS: usize = 10_000;

/// Returns the achieved significance level for the null hypothesis that
/// systems `a` and `b` are exchangeable. Each permutation flips the sign
/// of every pair difference independently; the p-value is the fraction of
/// permutations whose absolute mean difference reaches the observed one,
/// with the add-one correction so it is never zero.
pub fn paired_randomization(a: &[f64], b: &[f64], permutations: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CoreError::invalid(format!(
            "paired test: length mismatch {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(CoreError::invalid("paired test: no pairs"));
    }
    if permutations == 0 {
        return Err(CoreError::invalid("paired test: need at least one permutation"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at_least = 0usize;
    for _ in 0..permutations {
        let sum: f64 = diffs
            .iter()
            .map(|d| if rng.gen::<bool>() { *d } else { -*d })
            .sum();
        if (sum / n).abs() >= observed - 1e-15 {
            at_least += 1;
        }
    }
    Ok((at_least + 1) as f64 / (permutations + 1) as f64)
}

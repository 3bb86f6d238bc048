//! Epoch-based training with AdaGrad, batch-mean gradients, validation
//! perplexity, and patience-based early stopping. The model that leaves
//! [`train`] is the best validation checkpoint seen, not the last one.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use candela_core::{CoreError, Result};

use crate::graph::Tape;
use crate::model::{ArgModel, EncodedPair};
use crate::optim::AdaGrad;
use crate::params::{accumulate_grad_maps, scale_grad_map};

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub lr: f64,
    pub accumulator_init: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Consecutive epochs without a validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.15,
            accumulator_init: 0.1,
            clip_norm: 2.0,
            batch_size: 64,
            max_epochs: 30,
            patience: 3,
            seed: 13,
        }
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EpochMetrics {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean combined loss per training pair.
    pub train_total: f64,
    pub train_arg: f64,
    pub train_func: f64,
    pub train_sel: f64,
    pub val_perplexity: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metrics: Vec<EpochMetrics>,
    /// 1-based epoch whose checkpoint the model now holds.
    pub best_epoch: usize,
    pub best_perplexity: f64,
    pub stopped_early: bool,
}

/// Word-level perplexity over a pair set: `exp` of total word loss per
/// target token. Dropout is disabled.
pub fn perplexity(model: &ArgModel, pairs: &[EncodedPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(CoreError::invalid("perplexity over an empty pair set"));
    }
    let mut loss = 0.0;
    let mut tokens = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for pair in pairs {
        let mut tape = Tape::new();
        let bound = model.params.bind(&mut tape);
        let (_, parts) = model.pair_loss(&mut tape, &bound, pair, false, &mut rng)?;
        loss += parts.arg;
        tokens += parts.target_tokens;
    }
    Ok((loss / tokens as f64).exp())
}

/// Runs the training loop, reporting each finished epoch through
/// `on_epoch`. Returns an error (leaving the model as-is) when a loss or
/// gradient goes non-finite; the message names the offending quantity.
pub fn train(
    model: &mut ArgModel,
    train_pairs: &[EncodedPair],
    val_pairs: &[EncodedPair],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    if train_pairs.is_empty() {
        return Err(CoreError::invalid("no training pairs"));
    }
    if val_pairs.is_empty() {
        return Err(CoreError::invalid("no validation pairs"));
    }
    if cfg.batch_size == 0 || cfg.max_epochs == 0 {
        return Err(CoreError::invalid(
            "batch size and epoch count must be positive",
        ));
    }

    let mut optimizer = AdaGrad::new(
        &model.params,
        cfg.lr,
        cfg.accumulator_init,
        cfg.clip_norm,
    );
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));

    let mut metrics = Vec::new();
    let mut best: Option<(usize, f64, crate::params::ParamSet)> = None;
    let mut since_best = 0usize;
    let mut stopped_early = false;

    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);

        let mut sums = (0.0, 0.0, 0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = std::collections::BTreeMap::new();
            for &idx in batch {
                let pair = &train_pairs[idx];
                let mut tape = Tape::new();
                let bound = model.params.bind(&mut tape);
                let (loss, parts) =
                    model.pair_loss(&mut tape, &bound, pair, true, &mut dropout_rng)?;
                if !parts.total.is_finite() {
                    return Err(CoreError::invalid(format!(
                        "non-finite loss at epoch {epoch}, pair {idx}: \
                         arg={} func={} sel={}",
                        parts.arg, parts.func, parts.sel
                    )));
                }
                sums.0 += parts.total;
                sums.1 += parts.arg;
                sums.2 += parts.func;
                sums.3 += parts.sel;
                let mut pair_grads = tape.backward(loss);
                accumulate_grad_maps(&mut grads, bound.collect_grads(&mut pair_grads));
            }
            scale_grad_map(&mut grads, 1.0 / batch.len() as f64);
            optimizer.step(&mut model.params, &mut grads)?;
        }

        let n = train_pairs.len() as f64;
        let val_perplexity = perplexity(model, val_pairs)?;
        let record = EpochMetrics {
            epoch,
            train_total: sums.0 / n,
            train_arg: sums.1 / n,
            train_func: sums.2 / n,
            train_sel: sums.3 / n,
            val_perplexity,
            seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        metrics.push(record);

        let improved = best
            .as_ref()
            .map(|(_, ppl, _)| val_perplexity < *ppl)
            .unwrap_or(true);
        if improved {
            best = Some((epoch, val_perplexity, model.params.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (best_epoch, best_perplexity, best_params) =
        best.expect("at least one epoch ran");
    model.params = best_params;
    Ok(TrainOutcome {
        metrics,
        best_epoch,
        best_perplexity,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelDims;
    use crate::vocab::Vocab;
    use candela_core::synth::synth_pairs;

    fn setup(n: usize, seed: u64) -> (ArgModel, Vec<EncodedPair>) {
        let pairs = synth_pairs(21, n);
        let vocab = Vocab::build(&pairs, 40).unwrap();
        let dims = ModelDims {
            embed: 10,
            hidden: 12,
            layers: 2,
            dropout: 0.2,
        };
        let model = ArgModel::new(vocab, dims, seed);
        let encoded = pairs
            .iter()
            .map(|p| EncodedPair::from_pair(&model.vocab, p).unwrap())
            .collect();
        (model, encoded)
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            max_epochs: 5,
            patience: 10,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn five_epochs_reduce_the_training_loss() {
        let (mut model, pairs) = setup(8, 1);
        let out = train(&mut model, &pairs, &pairs, &quick_cfg(), |_| {}).unwrap();
        assert_eq!(out.metrics.len(), 5);
        let first = out.metrics.first().unwrap().train_total;
        let last = out.metrics.last().unwrap().train_total;
        assert!(
            last < first,
            "loss should drop over five epochs: {first} -> {last}"
        );
        assert!(out.metrics.iter().all(|m| m.val_perplexity.is_finite()));
    }

    #[test]
    fn same_seed_reproduces_the_run_exactly() {
        let (mut a, pairs) = setup(6, 2);
        let (mut b, _) = setup(6, 2);
        let cfg = quick_cfg();
        let out_a = train(&mut a, &pairs, &pairs, &cfg, |_| {}).unwrap();
        let out_b = train(&mut b, &pairs, &pairs, &cfg, |_| {}).unwrap();
        for (ma, mb) in out_a.metrics.iter().zip(&out_b.metrics) {
            assert_eq!(ma.train_total, mb.train_total);
            assert_eq!(ma.val_perplexity, mb.val_perplexity);
        }
        for (name, tensor) in a.params.iter() {
            assert_eq!(b.params.get(name).data(), tensor.data(), "{name}");
        }

        let mut c = setup(6, 2).0;
        let shifted = TrainConfig {
            seed: 99,
            ..cfg
        };
        let out_c = train(&mut c, &pairs, &pairs, &shifted, |_| {}).unwrap();
        assert_ne!(
            out_a.metrics[0].train_total,
            out_c.metrics[0].train_total,
            "a different shuffle and dropout seed should change the run"
        );
    }

    #[test]
    fn model_keeps_the_best_validation_checkpoint() {
        let (mut model, pairs) = setup(6, 5);
        let cfg = TrainConfig {
            batch_size: 3,
            max_epochs: 12,
            patience: 2,
            seed: 7,
            ..TrainConfig::default()
        };
        let out = train(&mut model, &pairs, &pairs, &cfg, |_| {}).unwrap();
        let recomputed = perplexity(&model, &pairs).unwrap();
        assert!(
            (recomputed - out.best_perplexity).abs() < 1e-12,
            "restored model should score the best perplexity: {recomputed} vs {}",
            out.best_perplexity
        );
        let reported_best = out
            .metrics
            .iter()
            .map(|m| m.val_perplexity)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_perplexity, reported_best);
        if out.stopped_early {
            assert_eq!(out.metrics.len(), out.best_epoch + cfg.patience);
        }
    }

    #[test]
    fn empty_sets_are_rejected() {
        let (mut model, pairs) = setup(2, 1);
        assert!(train(&mut model, &[], &pairs, &quick_cfg(), |_| {}).is_err());
        assert!(train(&mut model, &pairs, &[], &quick_cfg(), |_| {}).is_err());
        assert!(perplexity(&model, &[]).is_err());
    }

    #[test]
    fn perplexity_matches_a_direct_recompute() {
        let (model, pairs) = setup(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut loss = 0.0;
        let mut tokens = 0usize;
        for pair in &pairs {
            let mut tape = Tape::new();
            let bound = model.params.bind(&mut tape);
            let (_, parts) = model.pair_loss(&mut tape, &bound, pair, false, &mut rng).unwrap();
            loss += parts.arg;
            tokens += parts.target_tokens;
        }
        let want = (loss / tokens as f64).exp();
        let got = perplexity(&model, &pairs).unwrap();
        assert!((got - want).abs() < 1e-12);
    }
}

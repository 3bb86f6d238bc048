//! AdaGrad with global-norm gradient clipping.

use std::collections::BTreeMap;

use candela_core::{CoreError, Result};

use crate::params::ParamSet;
use crate::tensor::Tensor;

pub struct AdaGrad {
    lr: f64,
    clip_norm: f64,
    accumulators: BTreeMap<String, Tensor>,
}

impl AdaGrad {
    /// One accumulator per parameter, every element starting at
    /// `accumulator_init`.
    pub fn new(params: &ParamSet, lr: f64, accumulator_init: f64, clip_norm: f64) -> Self {
        let accumulators = params
            .iter()
            .map(|(name, tensor)| {
                let acc = Tensor::from_vec(
                    tensor.rows(),
                    tensor.cols(),
                    vec![accumulator_init; tensor.len()],
                );
                (name.clone(), acc)
            })
            .collect();
        AdaGrad {
            lr,
            clip_norm,
            accumulators,
        }
    }

    /// Applies one update. The whole gradient set is rescaled first when
    /// its global L2 norm exceeds `clip_norm`; then, per element,
    /// accumulator += g^2 and param -= lr * g / sqrt(accumulator).
    pub fn step(
        &mut self,
        params: &mut ParamSet,
        grads: &mut BTreeMap<String, Tensor>,
    ) -> Result<()> {
        let mut sq_sum = 0.0;
        for (name, grad) in grads.iter() {
            for &g in grad.data() {
                if !g.is_finite() {
                    return Err(CoreError::invalid(format!(
                        "non-finite gradient in parameter {name}"
                    )));
                }
                sq_sum += g * g;
            }
        }
        let norm = sq_sum.sqrt();
        if norm > self.clip_norm {
            let factor = self.clip_norm / norm;
            for grad in grads.values_mut() {
                for g in grad.data_mut() {
                    *g *= factor;
                }
            }
        }

        for (name, grad) in grads.iter() {
            let acc = self
                .accumulators
                .get_mut(name)
                .ok_or_else(|| CoreError::invalid(format!("gradient for unknown parameter {name}")))?;
            let param = params.get_mut(name);
            for ((p, a), &g) in param
                .data_mut()
                .iter_mut()
                .zip(acc.data_mut())
                .zip(grad.data())
            {
                *a += g * g;
                *p -= self.lr * g / a.sqrt();
            }
        }
        Ok(())
    }
}

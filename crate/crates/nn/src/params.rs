//! Named parameter tensors: initialization, tape binding, gradient
//! collection, and binary serialization.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;

use candela_core::binio;
use candela_core::{CoreError, Result};

use crate::graph::{Gradients, NodeId, Tape};
use crate::tensor::Tensor;

/// Weight matrices start uniform in (-INIT_RANGE, INIT_RANGE).
pub const INIT_RANGE: f64 = 0.1;

const PARAMS_MAGIC: &[u8; 8] = b"CNDLPRM1";

/// All trainable tensors of a model, keyed by a stable dotted name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    tensors: BTreeMap<String, Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) {
        assert!(
            self.tensors.insert(name.to_string(), tensor).is_none(),
            "duplicate parameter name {name}"
        );
    }

    pub fn insert_uniform<R: Rng>(&mut self, name: &str, rows: usize, cols: usize, rng: &mut R) {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE))
            .collect();
        self.insert(name, Tensor::from_vec(rows, cols, data));
    }

    pub fn insert_zeros(&mut self, name: &str, rows: usize, cols: usize) {
        self.insert(name, Tensor::zeros(rows, cols));
    }

    pub fn get(&self, name: &str) -> &Tensor {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.tensors.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.tensors.keys()
    }

    /// Copies every tensor onto the tape as a leaf, so one forward pass can
    /// reference parameters by name.
    pub fn bind(&self, tape: &mut Tape) -> Bound {
        let ids = self
            .tensors
            .iter()
            .map(|(name, tensor)| (name.clone(), tape.leaf(tensor.clone())))
            .collect();
        Bound { ids }
    }

    /// Serializes all tensors with a magic header, count, and per-tensor
    /// name, shape, and row-major data.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(PARAMS_MAGIC)?;
        binio::write_u64(w, self.tensors.len() as u64)?;
        for (name, tensor) in &self.tensors {
            binio::write_str(w, name)?;
            binio::write_u64(w, tensor.rows() as u64)?;
            binio::write_u64(w, tensor.cols() as u64)?;
            binio::write_f64_slice(w, tensor.data())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::expect_magic(r, PARAMS_MAGIC)?;
        let count = binio::read_u64(r)? as usize;
        let mut tensors = BTreeMap::new();
        for _ in 0..count {
            let name = binio::read_str(r, 1 << 16)?;
            let rows = binio::read_u64(r)? as usize;
            let cols = binio::read_u64(r)? as usize;
            let data = binio::read_f64_vec(r, 1 << 32)?;
            if data.len() != rows * cols {
                return Err(CoreError::invalid(format!(
                    "parameter {name}: {} values for shape {rows}x{cols}",
                    data.len()
                )));
            }
            tensors.insert(name, Tensor::from_vec(rows, cols, data));
        }
        Ok(ParamSet { tensors })
    }
}

/// Tape node ids for one binding of a ParamSet.
pub struct Bound {
    ids: BTreeMap<String, NodeId>,
}

impl Bound {
    pub fn id(&self, name: &str) -> NodeId {
        *self
            .ids
            .get(name)
            .unwrap_or_else(|| panic!("parameter {name} not bound"))
    }

    /// Collects gradients per parameter name. Parameters the loss never
    /// touched are omitted (their gradient is zero).
    pub fn collect_grads(&self, grads: &mut Gradients) -> BTreeMap<String, Tensor> {
        let mut out = BTreeMap::new();
        for (name, id) in &self.ids {
            if let Some(g) = grads.take(*id) {
                out.insert(name.clone(), g);
            }
        }
        out
    }
}

/// Adds `src` into `dst`, inserting missing entries, for gradient
/// accumulation across the pairs of a batch.
pub fn accumulate_grad_maps(dst: &mut BTreeMap<String, Tensor>, src: BTreeMap<String, Tensor>) {
    for (name, grad) in src {
        match dst.get_mut(&name) {
            Some(existing) => {
                assert_eq!(existing.shape(), grad.shape(), "gradient shape drift");
                for (a, b) in existing.data_mut().iter_mut().zip(grad.data()) {
                    *a += b;
                }
            }
            None => {
                dst.insert(name, grad);
            }
        }
    }
}

/// Scales every gradient in place, used for batch-mean reduction.
pub fn scale_grad_map(grads: &mut BTreeMap<String, Tensor>, factor: f64) {
    for grad in grads.values_mut() {
        for v in grad.data_mut() {
            *v *= factor;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_is_seeded_and_in_range() {
        let mut a = ParamSet::new();
        let mut b = ParamSet::new();
        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        a.insert_uniform("w", 4, 5, &mut rng_a);
        b.insert_uniform("w", 4, 5, &mut rng_b);
        assert_eq!(a.get("w"), b.get("w"));
        assert!(a.get("w").data().iter().all(|v| v.abs() < INIT_RANGE));
        a.insert_zeros("b", 4, 1);
        assert!(a.get("b").data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn roundtrip_is_exact() {
        let mut set = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        set.insert_uniform("layer.w", 3, 7, &mut rng);
        set.insert_uniform("layer.u", 2, 2, &mut rng);
        set.insert_zeros("layer.b", 3, 1);
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        let back = ParamSet::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(set, back);

        // Byte-identical re-serialization.
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn corrupt_header_is_rejected() {
        let buf = b"NOTMAGIC".to_vec();
        assert!(ParamSet::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn bound_grads_only_cover_touched_params() {
        let mut set = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        set.insert_uniform("used", 2, 1, &mut rng);
        set.insert_uniform("unused", 2, 1, &mut rng);
        let mut tape = Tape::new();
        let bound = set.bind(&mut tape);
        let used = bound.id("used");
        let loss = tape.sum(used);
        let mut grads = tape.backward(loss);
        let by_name = bound.collect_grads(&mut grads);
        assert!(by_name.contains_key("used"));
        assert!(!by_name.contains_key("unused"));
    }

    #[test]
    fn grad_map_accumulation_adds_elementwise() {
        let mut dst = BTreeMap::new();
        dst.insert("w".to_string(), Tensor::vector(vec![1.0, 2.0]));
        let mut src = BTreeMap::new();
        src.insert("w".to_string(), Tensor::vector(vec![0.5, -1.0]));
        src.insert("v".to_string(), Tensor::vector(vec![3.0]));
        accumulate_grad_maps(&mut dst, src);
        assert_eq!(dst["w"].data(), &[1.5, 1.0]);
        assert_eq!(dst["v"].data(), &[3.0]);
        scale_grad_map(&mut dst, 0.5);
        assert_eq!(dst["w"].data(), &[0.75, 0.5]);
    }
}

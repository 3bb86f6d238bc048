//! Reverse-mode automatic differentiation on a tape of f64 tensors.
//!
//! Every operation records its inputs and forward value; `backward` walks
//! the tape in reverse and accumulates gradients. Values are computed
//! eagerly, so the tape can drive search procedures that inspect
//! intermediate results.

use rand::Rng;

use crate::tensor::Tensor;

/// Lower clamp applied inside `ln` so log-losses stay finite.
pub const LN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    AddN(Vec<NodeId>),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    MatMul(NodeId, NodeId),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Softmax(NodeId),
    Ln(NodeId),
    Concat(Vec<NodeId>),
    StackRows(Vec<NodeId>),
    StackCols(Vec<NodeId>),
    SliceRows(NodeId, usize),
    Sum(NodeId),
    Dot(NodeId, NodeId),
    EmbedRow(NodeId, usize),
    Dropout(NodeId, Vec<f64>),
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Gradients keyed by tape node, produced by `Tape::backward`.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads[id.0].take()
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Leaf holding a constant or input; participates in backward but its
    /// gradient is usually ignored.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "add shape mismatch");
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x + y).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Add(a, b))
    }

    /// Sum of any number of same-shaped tensors. Empty input is not
    /// allowed; callers materialize an explicit zero when a sum can be
    /// empty.
    pub fn add_n(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "add_n needs at least one node");
        let shape = self.value(parts[0]).shape();
        let mut data = vec![0.0; shape.0 * shape.1];
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.shape(), shape, "add_n shape mismatch");
            for (acc, v) in data.iter_mut().zip(t.data()) {
                *acc += v;
            }
        }
        self.push(
            Tensor::from_vec(shape.0, shape.1, data),
            Op::AddN(parts.to_vec()),
        )
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "sub shape mismatch");
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x - y).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "mul shape mismatch");
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x * y).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let ta = self.value(a);
        let data = ta.data().iter().map(|x| x * c).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Scale(a, c))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(
            ta.cols(),
            tb.rows(),
            "matmul inner dimension mismatch: {:?} x {:?}",
            ta.shape(),
            tb.shape()
        );
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            let a_row = ta.row(i);
            for (l, &a_il) in a_row.iter().enumerate().take(k) {
                if a_il == 0.0 {
                    continue;
                }
                let b_row = tb.row(l);
                let out = &mut data[i * n..(i + 1) * n];
                for (o, bv) in out.iter_mut().zip(b_row) {
                    *o += a_il * bv;
                }
            }
        }
        self.push(Tensor::from_vec(m, n, data), Op::MatMul(a, b))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let ta = self.value(a);
        let data = ta.data().iter().map(|x| x.tanh()).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let ta = self.value(a);
        let data = ta
            .data()
            .iter()
            .map(|x| 1.0 / (1.0 + (-x).exp()))
            .collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Sigmoid(a))
    }

    /// Numerically stable softmax over a column vector.
    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let ta = self.value(a);
        assert_eq!(ta.cols(), 1, "softmax expects a column vector");
        let max = ta.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = ta.data().iter().map(|x| (x - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let data = exps.iter().map(|e| e / total).collect();
        let value = Tensor::from_vec(ta.rows(), 1, data);
        self.push(value, Op::Softmax(a))
    }

    /// Elementwise ln with the argument clamped at `LN_CLAMP`. Inputs at
    /// or below the clamp get zero gradient.
    pub fn ln(&mut self, a: NodeId) -> NodeId {
        let ta = self.value(a);
        let data = ta.data().iter().map(|x| x.max(LN_CLAMP).ln()).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Ln(a))
    }

    /// Stacks column vectors into one taller column vector.
    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "concat needs at least one node");
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols(), 1, "concat expects column vectors");
            data.extend_from_slice(t.data());
        }
        let rows = data.len();
        self.push(Tensor::from_vec(rows, 1, data), Op::Concat(parts.to_vec()))
    }

    /// Lays column vectors out as the rows of a new matrix: `k` vectors of
    /// length `r` become a `k x r` matrix whose row `i` is vector `i`.
    pub fn stack_rows(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "stack_rows needs at least one node");
        let width = self.value(parts[0]).rows();
        let mut data = Vec::with_capacity(parts.len() * width);
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols(), 1, "stack_rows expects column vectors");
            assert_eq!(t.rows(), width, "stack_rows expects equal lengths");
            data.extend_from_slice(t.data());
        }
        let value = Tensor::from_vec(parts.len(), width, data);
        self.push(value, Op::StackRows(parts.to_vec()))
    }

    /// Lays column vectors out as the columns of a new matrix: `k` vectors of
    /// length `r` become an `r x k` matrix whose column `i` is vector `i`.
    pub fn stack_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "stack_cols needs at least one node");
        let rows = self.value(parts[0]).rows();
        let cols = parts.len();
        let mut data = vec![0.0; rows * cols];
        for (i, &p) in parts.iter().enumerate() {
            let t = self.value(p);
            assert_eq!(t.cols(), 1, "stack_cols expects column vectors");
            assert_eq!(t.rows(), rows, "stack_cols expects equal lengths");
            for r in 0..rows {
                data[r * cols + i] = t.data()[r];
            }
        }
        let value = Tensor::from_vec(rows, cols, data);
        self.push(value, Op::StackCols(parts.to_vec()))
    }

    /// Rows `start..start+len`, all columns.
    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let ta = self.value(a);
        assert!(start + len <= ta.rows(), "slice out of range");
        let cols = ta.cols();
        let data = ta.data()[start * cols..(start + len) * cols].to_vec();
        self.push(Tensor::from_vec(len, cols, data), Op::SliceRows(a, start))
    }

    /// Sum of all entries, as a 1x1 tensor.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Tensor::from_vec(1, 1, vec![total]), Op::Sum(a))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "dot shape mismatch");
        assert_eq!(ta.cols(), 1, "dot expects column vectors");
        let total: f64 = ta.data().iter().zip(tb.data()).map(|(x, y)| x * y).sum();
        self.push(Tensor::from_vec(1, 1, vec![total]), Op::Dot(a, b))
    }

    /// Row `row` of an embedding matrix as a column vector.
    pub fn embed_row(&mut self, matrix: NodeId, row: usize) -> NodeId {
        let tm = self.value(matrix);
        assert!(row < tm.rows(), "embedding row out of range");
        let data = tm.row(row).to_vec();
        let rows = data.len();
        self.push(Tensor::from_vec(rows, 1, data), Op::EmbedRow(matrix, row))
    }

    /// Inverted dropout: surviving entries are scaled by 1/(1-p) so the
    /// expectation is unchanged. Disabled or p = 0 returns the input node.
    pub fn dropout<R: Rng>(&mut self, a: NodeId, p: f64, enabled: bool, rng: &mut R) -> NodeId {
        if !enabled || p == 0.0 {
            return a;
        }
        assert!((0.0..1.0).contains(&p), "dropout rate must be in [0, 1)");
        let keep = 1.0 - p;
        let ta = self.value(a);
        let mask: Vec<f64> = (0..ta.len())
            .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let data = ta.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        let value = Tensor::from_vec(ta.rows(), ta.cols(), data);
        self.push(value, Op::Dropout(a, mask))
    }

    /// Accumulates `delta` into the gradient slot for `id`.
    fn accumulate(grads: &mut [Option<Tensor>], id: NodeId, delta: Tensor) {
        match &mut grads[id.0] {
            Some(existing) => {
                for (acc, v) in existing.data_mut().iter_mut().zip(delta.data()) {
                    *acc += v;
                }
            }
            slot @ None => *slot = Some(delta),
        }
    }

    /// Reverse pass from a scalar loss node. Returns gradients for every
    /// node reached from the loss.
    pub fn backward(&self, loss: NodeId) -> Gradients {
        assert_eq!(
            self.value(loss).shape(),
            (1, 1),
            "backward expects a scalar loss"
        );
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::from_vec(1, 1, vec![1.0]));

        for idx in (0..self.nodes.len()).rev() {
            let Some(grad) = grads[idx].clone() else {
                continue;
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    Self::accumulate(&mut grads, *a, grad.clone());
                    Self::accumulate(&mut grads, *b, grad);
                }
                Op::AddN(parts) => {
                    for &p in parts {
                        Self::accumulate(&mut grads, p, grad.clone());
                    }
                }
                Op::Sub(a, b) => {
                    Self::accumulate(&mut grads, *a, grad.clone());
                    let neg = Tensor::from_vec(
                        grad.rows(),
                        grad.cols(),
                        grad.data().iter().map(|g| -g).collect(),
                    );
                    Self::accumulate(&mut grads, *b, neg);
                }
                Op::Mul(a, b) => {
                    let ga = pointwise(&grad, self.value(*b), |g, y| g * y);
                    let gb = pointwise(&grad, self.value(*a), |g, x| g * x);
                    Self::accumulate(&mut grads, *a, ga);
                    Self::accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, c) => {
                    let ga = map(&grad, |g| g * c);
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    // dA = G * B^T
                    let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                    let mut ga = vec![0.0; m * k];
                    for i in 0..m {
                        for l in 0..k {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += grad.at(i, j) * tb.at(l, j);
                            }
                            ga[i * k + l] = acc;
                        }
                    }
                    // dB = A^T * G
                    let mut gb = vec![0.0; k * n];
                    for l in 0..k {
                        for j in 0..n {
                            let mut acc = 0.0;
                            for i in 0..m {
                                acc += ta.at(i, l) * grad.at(i, j);
                            }
                            gb[l * n + j] = acc;
                        }
                    }
                    Self::accumulate(&mut grads, *a, Tensor::from_vec(m, k, ga));
                    Self::accumulate(&mut grads, *b, Tensor::from_vec(k, n, gb));
                }
                Op::Tanh(a) => {
                    let ga = pointwise(&grad, &node.value, |g, y| g * (1.0 - y * y));
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Sigmoid(a) => {
                    let ga = pointwise(&grad, &node.value, |g, y| g * y * (1.0 - y));
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let inner: f64 = grad.data().iter().zip(y.data()).map(|(g, p)| g * p).sum();
                    let ga = Tensor::from_vec(
                        y.rows(),
                        1,
                        y.data()
                            .iter()
                            .zip(grad.data())
                            .map(|(p, g)| p * (g - inner))
                            .collect(),
                    );
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Ln(a) => {
                    let ta = self.value(*a);
                    let ga = pointwise(&grad, ta, |g, x| if x > LN_CLAMP { g / x } else { 0.0 });
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let rows = self.value(p).rows();
                        let slice = grad.data()[offset..offset + rows].to_vec();
                        Self::accumulate(&mut grads, p, Tensor::from_vec(rows, 1, slice));
                        offset += rows;
                    }
                }
                Op::StackRows(parts) => {
                    let width = grad.cols();
                    for (i, &p) in parts.iter().enumerate() {
                        let slice = grad.data()[i * width..(i + 1) * width].to_vec();
                        Self::accumulate(&mut grads, p, Tensor::from_vec(width, 1, slice));
                    }
                }
                Op::StackCols(parts) => {
                    let rows = grad.rows();
                    let cols = grad.cols();
                    for (i, &p) in parts.iter().enumerate() {
                        let col: Vec<f64> = (0..rows).map(|r| grad.data()[r * cols + i]).collect();
                        Self::accumulate(&mut grads, p, Tensor::from_vec(rows, 1, col));
                    }
                }
                Op::SliceRows(a, start) => {
                    let ta = self.value(*a);
                    let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                    let cols = ta.cols();
                    let flat_start = *start * cols;
                    for (i, g) in grad.data().iter().enumerate() {
                        ga.data_mut()[flat_start + i] = *g;
                    }
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Sum(a) => {
                    let ta = self.value(*a);
                    let g = grad.at(0, 0);
                    let ga = Tensor::from_vec(ta.rows(), ta.cols(), vec![g; ta.len()]);
                    Self::accumulate(&mut grads, *a, ga);
                }
                Op::Dot(a, b) => {
                    let g = grad.at(0, 0);
                    let ga = map(self.value(*b), |y| g * y);
                    let gb = map(self.value(*a), |x| g * x);
                    Self::accumulate(&mut grads, *a, ga);
                    Self::accumulate(&mut grads, *b, gb);
                }
                Op::EmbedRow(matrix, row) => {
                    let tm = self.value(*matrix);
                    let mut gm = Tensor::zeros(tm.rows(), tm.cols());
                    gm.row_mut(*row).copy_from_slice(grad.data());
                    Self::accumulate(&mut grads, *matrix, gm);
                }
                Op::Dropout(a, mask) => {
                    let ga = Tensor::from_vec(
                        grad.rows(),
                        grad.cols(),
                        grad.data().iter().zip(mask).map(|(g, m)| g * m).collect(),
                    );
                    Self::accumulate(&mut grads, *a, ga);
                }
            }
        }
        Gradients { grads }
    }
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::from_vec(t.rows(), t.cols(), t.data().iter().map(|&x| f(x)).collect())
}

fn pointwise(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    debug_assert_eq!(a.shape(), b.shape());
    Tensor::from_vec(
        a.rows(),
        a.cols(),
        a.data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| f(x, y))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central finite difference of `f` at `x[i]`.
    fn numeric_grad<F: FnMut(&[f64]) -> f64>(x: &[f64], i: usize, mut f: F) -> f64 {
        let h = 1e-5;
        let mut plus = x.to_vec();
        plus[i] += h;
        let mut minus = x.to_vec();
        minus[i] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a_data: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b_data: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::from_vec(2, 3, a_data.clone()));
        let b = tape.leaf(Tensor::from_vec(3, 4, b_data.clone()));
        let c = tape.matmul(a, b);
        for i in 0..2 {
            for j in 0..4 {
                let mut expect = 0.0;
                for l in 0..3 {
                    expect += a_data[i * 3 + l] * b_data[l * 4 + j];
                }
                assert!((tape.value(c).at(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    /// Builds a scalar from a composite expression and checks every input
    /// gradient against finite differences.
    #[test]
    fn composite_expression_gradients_match_finite_differences() {
        let x0: Vec<f64> = vec![0.3, -0.7, 1.2, 0.05];
        let w0: Vec<f64> = vec![0.5, -0.2, 0.8, 0.1, -0.4, 0.9, 0.2, -0.6];

        let eval = |x: &[f64], w: &[f64]| -> (f64, Option<(Vec<f64>, Vec<f64>)>) {
            let mut tape = Tape::new();
            let xn = tape.leaf(Tensor::vector(x.to_vec()));
            let wn = tape.leaf(Tensor::from_vec(2, 4, w.to_vec()));
            let h = tape.matmul(wn, xn);
            let t = tape.tanh(h);
            let s = tape.sigmoid(h);
            let m = tape.mul(t, s);
            let p = tape.softmax(m);
            let lp = tape.ln(p);
            let picked = tape.slice_rows(lp, 1, 1);
            let all = tape.sum(lp);
            let scaled = tape.scale(all, 0.25);
            let d = tape.dot(t, s);
            let partial = tape.add(picked, scaled);
            let loss = tape.add(partial, d);
            let g = tape.backward(loss);
            let gx = g.get(xn).map(|t| t.data().to_vec());
            let gw = g.get(wn).map(|t| t.data().to_vec());
            (
                tape.value(loss).at(0, 0),
                gx.and_then(|a| gw.map(|b| (a, b))),
            )
        };

        let (_, grads) = eval(&x0, &w0);
        let (gx, gw) = grads.expect("gradients reach both leaves");
        for i in 0..x0.len() {
            let fd = numeric_grad(&x0, i, |x| eval(x, &w0).0);
            assert!(rel_err(gx[i], fd) < 1e-6, "x[{i}]: {} vs {}", gx[i], fd);
        }
        for i in 0..w0.len() {
            let fd = numeric_grad(&w0, i, |w| eval(&x0, w).0);
            assert!(rel_err(gw[i], fd) < 1e-6, "w[{i}]: {} vs {}", gw[i], fd);
        }
    }

    #[test]
    fn concat_and_slice_route_gradients_to_the_right_rows() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![1.0, 2.0]));
        let b = tape.leaf(Tensor::vector(vec![3.0]));
        let cat = tape.concat(&[a, b]);
        // loss = sum of rows 1..3 = a[1] + b[0]
        let tail = tape.slice_rows(cat, 1, 2);
        let loss = tape.sum(tail);
        let g = tape.backward(loss);
        assert_eq!(g.get(a).unwrap().data(), &[0.0, 1.0]);
        assert_eq!(g.get(b).unwrap().data(), &[1.0]);
    }

    #[test]
    fn stacked_attention_matches_per_vector_arithmetic() {
        // scores = rows(a, b) . q, context = cols(a, b) . softmax(scores).
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![1.0, -2.0]));
        let b = tape.leaf(Tensor::vector(vec![0.5, 3.0]));
        let q = tape.leaf(Tensor::vector(vec![0.7, -0.4]));
        let rows = tape.stack_rows(&[a, b]);
        assert_eq!(tape.value(rows).shape(), (2, 2));
        assert_eq!(tape.value(rows).data(), &[1.0, -2.0, 0.5, 3.0]);
        let cols = tape.stack_cols(&[a, b]);
        assert_eq!(tape.value(cols).shape(), (2, 2));
        assert_eq!(tape.value(cols).data(), &[1.0, 0.5, -2.0, 3.0]);

        let scores = tape.matmul(rows, q);
        let weights = tape.softmax(scores);
        let context = tape.matmul(cols, weights);
        let picked = tape.slice_rows(context, 0, 1);
        let loss = tape.sum(picked);

        let s0 = 1.0f64 * 0.7 + (-2.0) * (-0.4);
        let s1 = 0.5f64 * 0.7 + 3.0 * (-0.4);
        let z = s0.exp() + s1.exp();
        let expected = (s0.exp() / z) * 1.0 + (s1.exp() / z) * 0.5;
        assert!((tape.value(loss).data()[0] - expected).abs() < 1e-12);

        // Finite differences over both stacked vectors.
        let g = tape.backward(loss);
        for (leaf, init) in [(a, vec![1.0, -2.0]), (b, vec![0.5, 3.0])] {
            let analytic = g.get(leaf).unwrap().data().to_vec();
            for i in 0..2 {
                let eval = |vals: &[f64]| {
                    let (av, bv) = if leaf == a {
                        (vals.to_vec(), vec![0.5, 3.0])
                    } else {
                        (vec![1.0, -2.0], vals.to_vec())
                    };
                    let s0 = av[0] * 0.7 + av[1] * -0.4;
                    let s1 = bv[0] * 0.7 + bv[1] * -0.4;
                    let z = s0.exp() + s1.exp();
                    (s0.exp() / z) * av[0] + (s1.exp() / z) * bv[0]
                };
                let mut lo = init.clone();
                let mut hi = init.clone();
                lo[i] -= 1e-6;
                hi[i] += 1e-6;
                let fd = (eval(&hi) - eval(&lo)) / 2e-6;
                assert!(
                    rel_err(analytic[i], fd) < 1e-6,
                    "leaf {leaf:?} [{i}]: {} vs {}",
                    analytic[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn embed_row_gradient_lands_on_that_row() {
        let mut tape = Tape::new();
        let e = tape.leaf(Tensor::from_vec(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]));
        let row = tape.embed_row(e, 1);
        assert_eq!(tape.value(row).data(), &[0.3, 0.4]);
        let loss = tape.sum(row);
        let g = tape.backward(loss);
        let ge = g.get(e).unwrap();
        assert_eq!(ge.data(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn add_n_fans_gradient_out_to_every_part() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![1.0]));
        let b = tape.leaf(Tensor::vector(vec![2.0]));
        let c = tape.leaf(Tensor::vector(vec![3.0]));
        let s = tape.add_n(&[a, b, c]);
        assert_eq!(tape.value(s).data(), &[6.0]);
        let doubled = tape.scale(s, 2.0);
        let loss = tape.sum(doubled);
        let g = tape.backward(loss);
        for id in [a, b, c] {
            assert_eq!(g.get(id).unwrap().data(), &[2.0]);
        }
    }

    #[test]
    fn dropout_disabled_is_identity_and_mask_scales_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![1.0, 1.0, 1.0, 1.0]));
        let same = tape.dropout(a, 0.5, false, &mut rng);
        assert_eq!(same, a);

        let dropped = tape.dropout(a, 0.5, true, &mut rng);
        let loss = tape.sum(dropped);
        let g = tape.backward(loss);
        for (&v, &gv) in tape
            .value(dropped)
            .data()
            .iter()
            .zip(g.get(a).unwrap().data())
        {
            // Each position is either dropped (0 value, 0 grad) or kept
            // and scaled by 2.
            if v == 0.0 {
                assert_eq!(gv, 0.0);
            } else {
                assert_eq!(v, 2.0);
                assert_eq!(gv, 2.0);
            }
        }
    }

    #[test]
    fn ln_clamps_and_zeroes_gradient_below_clamp() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![0.5, 0.0]));
        let l = tape.ln(a);
        assert!((tape.value(l).at(0, 0) - 0.5f64.ln()).abs() < 1e-12);
        assert!((tape.value(l).at(1, 0) - LN_CLAMP.ln()).abs() < 1e-12);
        let loss = tape.sum(l);
        let g = tape.backward(loss);
        assert!((g.get(a).unwrap().at(0, 0) - 2.0).abs() < 1e-12);
        assert_eq!(g.get(a).unwrap().at(1, 0), 0.0);
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::vector(vec![1000.0, 999.0, -1000.0]));
        let p = tape.softmax(a);
        let v = tape.value(p);
        assert!(v.all_finite());
        let total: f64 = v.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(v.at(0, 0) > v.at(1, 0));
    }

    #[test]
    fn gradient_accumulates_when_node_is_reused() {
        // loss = sum(x) + dot(x, x): grad = 1 + 2x.
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![0.5, -1.0]));
        let s = tape.sum(x);
        let d = tape.dot(x, x);
        let loss = tape.add(s, d);
        let g = tape.backward(loss);
        let gx = g.get(x).unwrap();
        assert!((gx.at(0, 0) - 2.0).abs() < 1e-12);
        assert!((gx.at(1, 0) - (-1.0)).abs() < 1e-12);
    }
}

//! Stacked LSTM cells built on the tape. Gate order inside the packed
//! weight matrices is input, forget, output, candidate.

use rand::Rng;

use crate::graph::{NodeId, Tape};
use crate::params::{Bound, ParamSet};

/// Registers the parameters of one stack: layer 0 consumes `input_dim`,
/// further layers consume `hidden`. Weights are uniform-initialized,
/// biases zero. Names are `{prefix}.l{layer}.{w,u,b}`.
pub fn register_lstm<R: Rng>(
    params: &mut ParamSet,
    prefix: &str,
    layers: usize,
    input_dim: usize,
    hidden: usize,
    rng: &mut R,
) {
    for layer in 0..layers {
        let in_dim = if layer == 0 { input_dim } else { hidden };
        params.insert_uniform(&format!("{prefix}.l{layer}.w"), 4 * hidden, in_dim, rng);
        params.insert_uniform(&format!("{prefix}.l{layer}.u"), 4 * hidden, hidden, rng);
        params.insert_zeros(&format!("{prefix}.l{layer}.b"), 4 * hidden, 1);
    }
}

/// Hidden and cell state per layer.
#[derive(Clone)]
pub struct LstmState {
    pub h: Vec<NodeId>,
    pub c: Vec<NodeId>,
}

impl LstmState {
    /// All-layer state from a shared initial hidden node and zero cells.
    pub fn init(tape: &mut Tape, layers: usize, hidden: usize, h0: NodeId) -> Self {
        let zero = tape.leaf(crate::tensor::Tensor::zeros(hidden, 1));
        LstmState {
            h: vec![h0; layers],
            c: vec![zero; layers],
        }
    }

    pub fn zeros(tape: &mut Tape, layers: usize, hidden: usize) -> Self {
        let zero = tape.leaf(crate::tensor::Tensor::zeros(hidden, 1));
        LstmState {
            h: vec![zero; layers],
            c: vec![zero; layers],
        }
    }

    /// Top layer hidden state, the stack's output.
    pub fn top(&self) -> NodeId {
        *self.h.last().expect("at least one layer")
    }
}

/// One step of one layer: standard gated recurrence.
#[allow(clippy::too_many_arguments)]
fn layer_step(
    tape: &mut Tape,
    bound: &Bound,
    name_w: &str,
    name_u: &str,
    name_b: &str,
    x: NodeId,
    h_prev: NodeId,
    c_prev: NodeId,
    hidden: usize,
) -> (NodeId, NodeId) {
    let w = bound.id(name_w);
    let u = bound.id(name_u);
    let b = bound.id(name_b);
    let wx = tape.matmul(w, x);
    let uh = tape.matmul(u, h_prev);
    let lin = tape.add(wx, uh);
    let z = tape.add(lin, b);

    let i_raw = tape.slice_rows(z, 0, hidden);
    let f_raw = tape.slice_rows(z, hidden, hidden);
    let o_raw = tape.slice_rows(z, 2 * hidden, hidden);
    let g_raw = tape.slice_rows(z, 3 * hidden, hidden);

    let i = tape.sigmoid(i_raw);
    let f = tape.sigmoid(f_raw);
    let o = tape.sigmoid(o_raw);
    let g = tape.tanh(g_raw);

    let fc = tape.mul(f, c_prev);
    let ig = tape.mul(i, g);
    let c = tape.add(fc, ig);
    let c_tanh = tape.tanh(c);
    let h = tape.mul(o, c_tanh);
    (h, c)
}

/// Steps the whole stack once. Dropout (inverted, rate `dropout`) applies
/// between layers when `train` is set.
#[allow(clippy::too_many_arguments)]
pub fn lstm_step<R: Rng>(
    tape: &mut Tape,
    bound: &Bound,
    prefix: &str,
    state: &LstmState,
    x: NodeId,
    hidden: usize,
    dropout: f64,
    train: bool,
    rng: &mut R,
) -> LstmState {
    let layers = state.h.len();
    let mut hs = Vec::with_capacity(layers);
    let mut cs = Vec::with_capacity(layers);
    let mut input = x;
    for layer in 0..layers {
        if layer > 0 {
            input = tape.dropout(input, dropout, train, rng);
        }
        let (h, c) = layer_step(
            tape,
            bound,
            &format!("{prefix}.l{layer}.w"),
            &format!("{prefix}.l{layer}.u"),
            &format!("{prefix}.l{layer}.b"),
            input,
            state.h[layer],
            state.c[layer],
            hidden,
        );
        hs.push(h);
        cs.push(c);
        input = h;
    }
    LstmState { h: hs, c: cs }
}

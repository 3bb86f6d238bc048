//! The argument-generation model: a bidirectional LSTM encoder over the
//! statement-plus-passages stream, a sentence-level planning decoder that
//! attends over keyphrase memory, and a word-level realization decoder
//! that attends over encoder states.
//!
//! One training pair is one tape. The planner takes one step per argument
//! sentence; its step `j` input is the sum of the embeddings of the
//! keyphrases selected for that sentence (the start marker for sentence 0).
//! The realizer emits the target stream "sentence 0 </s> sentence 1 </s>
//! ... last sentence </arg>", conditioned on the planner state of the
//! sentence each token belongs to.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use candela_core::binio;
use candela_core::dataprep::{FunctionLabel, TrainingPair};
use candela_core::{CoreError, Result};

use crate::graph::{NodeId, Tape};
use crate::lstm::{lstm_step, register_lstm, LstmState};
use crate::params::{Bound, ParamSet};
use crate::tensor::Tensor;
use crate::vocab::Vocab;

const MODEL_MAGIC: &[u8; 8] = b"CNDLMDL1";
const MODEL_VERSION: u32 = 1;

/// Threshold above which the planner includes a keyphrase at inference.
pub const PLAN_INCLUDE_THRESHOLD: f64 = 0.5;

/// Size configuration. `layers` applies to the encoder (per direction)
/// and to both decoders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDims {
    pub embed: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
}

impl ModelDims {
    pub fn small() -> Self {
        ModelDims {
            embed: 64,
            hidden: 128,
            layers: 2,
            dropout: 0.2,
        }
    }
}

/// A training pair converted to vocabulary ids.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    /// Statement ++ `<sep>` ++ passage stream.
    pub input: Vec<usize>,
    /// Word ids per memory keyphrase.
    pub memory: Vec<Vec<usize>>,
    /// Argument token ids, one inner vector per sentence.
    pub sentences: Vec<Vec<usize>>,
    /// One function label per sentence.
    pub labels: Vec<FunctionLabel>,
    /// One bitmap per sentence over the memory entries.
    pub selection: Vec<Vec<bool>>,
}

impl EncodedPair {
    pub fn from_pair(vocab: &Vocab, pair: &TrainingPair) -> Result<Self> {
        if pair.argument.is_empty() {
            return Err(CoreError::invalid("training pair has no argument sentences"));
        }
        if pair.labels.len() != pair.argument.len() || pair.selection.len() != pair.argument.len()
        {
            return Err(CoreError::invalid(
                "labels and selection must line up with argument sentences",
            ));
        }
        for bits in &pair.selection {
            if bits.len() != pair.memory.len() {
                return Err(CoreError::invalid(
                    "selection bitmap width must equal memory size",
                ));
            }
        }
        let mut input = vocab.encode(&pair.statement);
        input.push(vocab.sep());
        input.extend(vocab.encode(&pair.passages));
        let memory = pair
            .memory
            .iter()
            .map(|entry| {
                if entry.words.is_empty() {
                    Err(CoreError::invalid("memory entry with no words"))
                } else {
                    Ok(vocab.encode(&entry.words))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let sentences = pair
            .argument
            .iter()
            .map(|sent| vocab.encode(sent))
            .collect();
        Ok(EncodedPair {
            input,
            memory,
            sentences,
            labels: pair.labels.clone(),
            selection: pair.selection.clone(),
        })
    }

    /// Number of realizer target positions: every argument token plus one
    /// terminator per sentence.
    pub fn target_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.len() + 1).sum()
    }
}

fn label_index(label: FunctionLabel) -> usize {
    match label {
        FunctionLabel::Filler => 0,
        FunctionLabel::Content => 1,
    }
}

pub fn label_from_index(index: usize) -> FunctionLabel {
    if index == 1 {
        FunctionLabel::Content
    } else {
        FunctionLabel::Filler
    }
}

/// Encoder output shared by both decoders and every beam hypothesis.
pub struct Encoded {
    /// One node per input position, each `2 * hidden` tall.
    pub states: Vec<NodeId>,
    /// The same states stacked as rows: `n x 2H`.
    pub rows: NodeId,
    /// The same states stacked as columns: `2H x n`.
    pub cols: NodeId,
    /// Projected final state, the initial hidden of both decoders.
    pub init: NodeId,
}

/// Keyphrase memory embedded on the tape.
pub struct MemoryCtx {
    /// One embedding per keyphrase (sum of its word embeddings).
    pub embeds: Vec<NodeId>,
    /// `M x E` row stack, present when the memory is non-empty.
    rows: Option<NodeId>,
    /// `E x M` column stack, present when the memory is non-empty.
    cols: Option<NodeId>,
}

impl MemoryCtx {
    pub fn len(&self) -> usize {
        self.embeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeds.is_empty()
    }
}

/// Planner recurrence state. `s` is the hidden state used to compute the
/// next sentence's keyphrase attention.
#[derive(Clone)]
pub struct PlanState {
    pub lstm: LstmState,
    pub s: NodeId,
}

/// What one planner step produced.
pub struct PlanOutcome {
    pub state: PlanState,
    /// Memory indices fed to this step (empty for the start step).
    pub chosen: Vec<usize>,
    /// Attention over the full memory, empty when the memory is empty.
    pub alphas: Vec<f64>,
    /// Argumentative-function distribution for the sentence, length 2.
    pub function: Vec<f64>,
}

/// What one realizer step produced.
pub struct RealizeOutcome {
    pub state: LstmState,
    /// Log-probabilities over the vocabulary.
    pub log_probs: NodeId,
}

/// Loss values for a single pair, already read off the tape.
#[derive(Debug, Clone, Copy)]
pub struct LossParts {
    pub total: f64,
    pub arg: f64,
    pub func: f64,
    pub sel: f64,
    pub target_tokens: usize,
}

pub struct ArgModel {
    pub dims: ModelDims,
    pub vocab: Vocab,
    pub params: ParamSet,
}

impl ArgModel {
    /// Fresh model with seeded uniform initialization.
    pub fn new(vocab: Vocab, dims: ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamSet::new();
        let v = vocab.len();
        let e = dims.embed;
        let h = dims.hidden;

        params.insert_uniform("embed", v, e, &mut rng);

        register_lstm(&mut params, "enc.fwd", dims.layers, e, h, &mut rng);
        register_lstm(&mut params, "enc.bwd", dims.layers, e, h, &mut rng);
        params.insert_uniform("enc.proj.w", h, 2 * h, &mut rng);
        params.insert_zeros("enc.proj.b", h, 1);

        register_lstm(&mut params, "plan", dims.layers, e, h, &mut rng);
        params.insert_uniform("plan.attn.w", e, h, &mut rng);
        params.insert_uniform("plan.out.w", h, e + h, &mut rng);
        params.insert_uniform("plan.out.v", 2, h, &mut rng);
        params.insert_zeros("plan.out.b", 2, 1);

        register_lstm(&mut params, "real", dims.layers, e, h, &mut rng);
        params.insert_uniform("real.in.wp", e, h, &mut rng);
        params.insert_uniform("real.in.ww", e, e, &mut rng);
        params.insert_zeros("real.in.b", e, 1);
        params.insert_uniform("real.attn.w", 2 * h, h, &mut rng);
        params.insert_uniform("real.out.w", h, 3 * h, &mut rng);
        params.insert_uniform("real.out.v", v, h, &mut rng);
        params.insert_zeros("real.out.b", v, 1);

        ArgModel {
            dims,
            vocab,
            params,
        }
    }

    pub fn save<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MODEL_MAGIC)?;
        binio::write_u32(w, MODEL_VERSION)?;
        binio::write_u64(w, self.dims.embed as u64)?;
        binio::write_u64(w, self.dims.hidden as u64)?;
        binio::write_u64(w, self.dims.layers as u64)?;
        binio::write_f64(w, self.dims.dropout)?;
        self.vocab.write_to(w)?;
        self.params.write_to(w)?;
        Ok(())
    }

    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        binio::expect_magic(r, MODEL_MAGIC)?;
        let version = binio::read_u32(r)?;
        if version != MODEL_VERSION {
            return Err(CoreError::invalid(format!(
                "unsupported model version {version}"
            )));
        }
        let embed = binio::read_u64(r)? as usize;
        let hidden = binio::read_u64(r)? as usize;
        let layers = binio::read_u64(r)? as usize;
        let dropout = binio::read_f64(r)?;
        let vocab = Vocab::read_from(r)?;
        let params = ParamSet::read_from(r)?;
        let table = params.get("embed");
        if table.rows() != vocab.len() || table.cols() != embed {
            return Err(CoreError::invalid(format!(
                "embedding table is {}x{} but the checkpoint header says {}x{}",
                table.rows(),
                table.cols(),
                vocab.len(),
                embed
            )));
        }
        Ok(ArgModel {
            dims: ModelDims {
                embed,
                hidden,
                layers,
                dropout,
            },
            vocab,
            params,
        })
    }

    pub fn embed_token(&self, tape: &mut Tape, bound: &Bound, id: usize) -> NodeId {
        tape.embed_row(bound.id("embed"), id)
    }

    /// Keyphrase embedding: the sum of its word embeddings.
    fn embed_words(&self, tape: &mut Tape, bound: &Bound, ids: &[usize]) -> NodeId {
        let rows: Vec<NodeId> = ids
            .iter()
            .map(|&id| self.embed_token(tape, bound, id))
            .collect();
        tape.add_n(&rows)
    }

    /// Runs the bidirectional encoder over `ids`.
    pub fn encode<R: Rng>(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        ids: &[usize],
        train: bool,
        rng: &mut R,
    ) -> Result<Encoded> {
        if ids.is_empty() {
            return Err(CoreError::invalid("cannot encode an empty token sequence"));
        }
        let h = self.dims.hidden;
        let xs: Vec<NodeId> = ids
            .iter()
            .map(|&id| self.embed_token(tape, bound, id))
            .collect();

        let mut fwd_tops = Vec::with_capacity(ids.len());
        let mut state = LstmState::zeros(tape, self.dims.layers, h);
        for &x in &xs {
            state = lstm_step(
                tape,
                bound,
                "enc.fwd",
                &state,
                x,
                h,
                self.dims.dropout,
                train,
                rng,
            );
            fwd_tops.push(state.top());
        }

        let mut bwd_tops = Vec::with_capacity(ids.len());
        let mut state = LstmState::zeros(tape, self.dims.layers, h);
        for &x in xs.iter().rev() {
            state = lstm_step(
                tape,
                bound,
                "enc.bwd",
                &state,
                x,
                h,
                self.dims.dropout,
                train,
                rng,
            );
            bwd_tops.push(state.top());
        }

        let n = ids.len();
        let states: Vec<NodeId> = (0..n)
            .map(|i| tape.concat(&[fwd_tops[i], bwd_tops[n - 1 - i]]))
            .collect();
        let rows = tape.stack_rows(&states);
        let cols = tape.stack_cols(&states);

        // Final summary: last forward state next to the backward state that
        // has consumed the whole sequence (it sits at position 0).
        let summary = tape.concat(&[fwd_tops[n - 1], bwd_tops[n - 1]]);
        let proj = tape.matmul(bound.id("enc.proj.w"), summary);
        let shifted = tape.add(proj, bound.id("enc.proj.b"));
        let init = tape.tanh(shifted);

        Ok(Encoded {
            states,
            rows,
            cols,
            init,
        })
    }

    /// Embeds the keyphrase memory once per pair.
    pub fn memory_ctx(&self, tape: &mut Tape, bound: &Bound, memory: &[Vec<usize>]) -> MemoryCtx {
        let embeds: Vec<NodeId> = memory
            .iter()
            .map(|words| self.embed_words(tape, bound, words))
            .collect();
        let (rows, cols) = if embeds.is_empty() {
            (None, None)
        } else {
            (
                Some(tape.stack_rows(&embeds)),
                Some(tape.stack_cols(&embeds)),
            )
        };
        MemoryCtx {
            embeds,
            rows,
            cols,
        }
    }

    /// Planner state before the first step.
    pub fn plan_init(&self, tape: &mut Tape, enc: &Encoded) -> PlanState {
        let lstm = LstmState::init(tape, self.dims.layers, self.dims.hidden, enc.init);
        PlanState {
            lstm,
            s: enc.init,
        }
    }

    /// Keyphrase attention from the previous planner state, `M x 1`
    /// sigmoid scores. `None` when the memory is empty.
    fn plan_alpha(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        mem: &MemoryCtx,
        s_prev: NodeId,
    ) -> Option<NodeId> {
        let rows = mem.rows?;
        let query = tape.matmul(bound.id("plan.attn.w"), s_prev);
        let scores = tape.matmul(rows, query);
        Some(tape.sigmoid(scores))
    }

    /// Memory summary for the function classifier: attention-weighted sum
    /// of keyphrase embeddings, or zero when the memory is empty.
    fn plan_context(
        &self,
        tape: &mut Tape,
        mem: &MemoryCtx,
        alpha: Option<NodeId>,
    ) -> NodeId {
        match (mem.cols, alpha) {
            (Some(cols), Some(alpha)) => tape.matmul(cols, alpha),
            _ => tape.leaf(Tensor::zeros(self.dims.embed, 1)),
        }
    }

    fn plan_advance<R: Rng>(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        state: &PlanState,
        input: NodeId,
        train: bool,
        rng: &mut R,
    ) -> PlanState {
        let lstm = lstm_step(
            tape,
            bound,
            "plan",
            &state.lstm,
            input,
            self.dims.hidden,
            self.dims.dropout,
            train,
            rng,
        );
        PlanState {
            s: lstm.top(),
            lstm,
        }
    }

    /// Argumentative-function logits for a sentence: bottleneck over the
    /// memory context and the planner state.
    fn function_logits(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        context: NodeId,
        s: NodeId,
    ) -> NodeId {
        let cat = tape.concat(&[context, s]);
        let lin = tape.matmul(bound.id("plan.out.w"), cat);
        let bottleneck = tape.tanh(lin);
        let scores = tape.matmul(bound.id("plan.out.v"), bottleneck);
        tape.add(scores, bound.id("plan.out.b"))
    }

    /// One inference planner step. `first` runs the start step, which
    /// consumes the start-marker embedding and selects nothing. Later
    /// steps include every keyphrase whose attention clears
    /// [`PLAN_INCLUDE_THRESHOLD`] plus the best-scoring one, skipping
    /// already-used entries; ties go to the lowest index. Returns `None`
    /// when nothing is left to select, which ends the argument.
    pub fn plan_step_infer(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        state: &PlanState,
        mem: &MemoryCtx,
        used: &[bool],
        first: bool,
    ) -> Option<PlanOutcome> {
        let alpha = self.plan_alpha(tape, bound, mem, state.s);
        let alphas: Vec<f64> = alpha
            .map(|a| tape.value(a).data().to_vec())
            .unwrap_or_default();

        let chosen = if first {
            Vec::new()
        } else {
            if alphas.is_empty() || used.iter().all(|&u| u) {
                return None;
            }
            let argmax = alphas
                .iter()
                .enumerate()
                .fold(None::<(usize, f64)>, |best, (i, &a)| match best {
                    Some((_, b)) if a <= b => best,
                    _ => Some((i, a)),
                })
                .map(|(i, _)| i)
                .expect("non-empty alphas");
            let mut set: Vec<usize> = (0..alphas.len())
                .filter(|&i| alphas[i] > PLAN_INCLUDE_THRESHOLD || i == argmax)
                .filter(|&i| !used[i])
                .collect();
            if set.is_empty() {
                // Everything over the bar is spent: fall back to the best
                // unused entry.
                let best_unused = (0..alphas.len())
                    .filter(|&i| !used[i])
                    .fold(None::<(usize, f64)>, |best, i| match best {
                        Some((_, b)) if alphas[i] <= b => best,
                        _ => Some((i, alphas[i])),
                    })
                    .map(|(i, _)| i)
                    .expect("some entry unused");
                set = vec![best_unused];
            }
            set
        };

        let input = if first {
            self.embed_token(tape, bound, self.vocab.start())
        } else {
            let parts: Vec<NodeId> = chosen.iter().map(|&i| mem.embeds[i]).collect();
            tape.add_n(&parts)
        };
        let mut dummy = ChaCha8Rng::seed_from_u64(0);
        let next = self.plan_advance(tape, bound, state, input, false, &mut dummy);
        let context = self.plan_context(tape, mem, alpha);
        let logits = self.function_logits(tape, bound, context, next.s);
        let dist = tape.softmax(logits);
        let function = tape.value(dist).data().to_vec();

        Some(PlanOutcome {
            state: next,
            chosen,
            alphas,
            function,
        })
    }

    /// Attention of the realizer over encoder states: weights and the
    /// weighted state sum.
    fn encoder_attention(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        enc: &Encoded,
        z: NodeId,
    ) -> (NodeId, NodeId) {
        let query = tape.matmul(bound.id("real.attn.w"), z);
        let scores = tape.matmul(enc.rows, query);
        let beta = tape.softmax(scores);
        let context = tape.matmul(enc.cols, beta);
        (beta, context)
    }

    /// One realizer step: blends the owning sentence's planner state with
    /// the previous token, advances the word LSTM, attends over the
    /// encoder, and produces log-probabilities over the vocabulary.
    #[allow(clippy::too_many_arguments)]
    pub fn realize_step<R: Rng>(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        enc: &Encoded,
        state: &LstmState,
        prev_id: usize,
        s_sentence: NodeId,
        train: bool,
        rng: &mut R,
    ) -> RealizeOutcome {
        let prev = self.embed_token(tape, bound, prev_id);
        let from_plan = tape.matmul(bound.id("real.in.wp"), s_sentence);
        let from_word = tape.matmul(bound.id("real.in.ww"), prev);
        let lin = tape.add(from_plan, from_word);
        let shifted = tape.add(lin, bound.id("real.in.b"));
        let x = tape.tanh(shifted);

        let next = lstm_step(
            tape,
            bound,
            "real",
            state,
            x,
            self.dims.hidden,
            self.dims.dropout,
            train,
            rng,
        );
        let z = next.top();
        let (_, context) = self.encoder_attention(tape, bound, enc, z);
        let cat = tape.concat(&[context, z]);
        let lin = tape.matmul(bound.id("real.out.w"), cat);
        let bottleneck = tape.tanh(lin);
        let scores = tape.matmul(bound.id("real.out.v"), bottleneck);
        let logits = tape.add(scores, bound.id("real.out.b"));
        let probs = tape.softmax(logits);
        let log_probs = tape.ln(probs);

        RealizeOutcome {
            state: next,
            log_probs,
        }
    }

    /// Teacher-forced loss of one pair. Returns the loss node (for
    /// backward) and its already-evaluated parts. The three terms are
    /// summed with unit weights: word loss over the full target stream,
    /// function loss over the sentences, and selection loss over the
    /// planner attention of every sentence after the first.
    pub fn pair_loss<R: Rng>(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        pair: &EncodedPair,
        train: bool,
        rng: &mut R,
    ) -> Result<(NodeId, LossParts)> {
        let enc = self.encode(tape, bound, &pair.input, train, rng)?;
        let mem = self.memory_ctx(tape, bound, &pair.memory);
        let mut plan = self.plan_init(tape, &enc);

        let mut arg_terms = Vec::new();
        let mut func_terms = Vec::new();
        let mut sel_terms = Vec::new();

        let mut real_state = LstmState::init(tape, self.dims.layers, self.dims.hidden, enc.init);
        let mut prev_token = self.vocab.start();

        for (j, sentence) in pair.sentences.iter().enumerate() {
            let alpha = self.plan_alpha(tape, bound, &mem, plan.s);

            // Selection supervision applies from the second sentence on;
            // the first consumes the start marker by convention.
            if j > 0 {
                if let Some(alpha) = alpha {
                    let bits: Vec<f64> = pair.selection[j]
                        .iter()
                        .map(|&b| if b { 1.0 } else { 0.0 })
                        .collect();
                    let inverse: Vec<f64> = bits.iter().map(|b| 1.0 - b).collect();
                    let m = bits.len();
                    let bits = tape.leaf(Tensor::from_vec(m, 1, bits));
                    let inverse = tape.leaf(Tensor::from_vec(m, 1, inverse));
                    let ones = tape.leaf(Tensor::from_vec(m, 1, vec![1.0; m]));
                    let ln_alpha = tape.ln(alpha);
                    let complement = tape.sub(ones, alpha);
                    let ln_complement = tape.ln(complement);
                    let hit = tape.dot(bits, ln_alpha);
                    let miss = tape.dot(inverse, ln_complement);
                    let credit = tape.add(hit, miss);
                    sel_terms.push(tape.scale(credit, -1.0));
                }
            }

            let input = if j == 0 {
                self.embed_token(tape, bound, self.vocab.start())
            } else {
                let parts: Vec<NodeId> = pair.selection[j]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(m, _)| mem.embeds[m])
                    .collect();
                if parts.is_empty() {
                    tape.leaf(Tensor::zeros(self.dims.embed, 1))
                } else {
                    tape.add_n(&parts)
                }
            };
            plan = self.plan_advance(tape, bound, &plan, input, train, rng);

            let context = self.plan_context(tape, &mem, alpha);
            let logits = self.function_logits(tape, bound, context, plan.s);
            let dist = tape.softmax(logits);
            let ln_dist = tape.ln(dist);
            let picked = tape.slice_rows(ln_dist, label_index(pair.labels[j]), 1);
            func_terms.push(tape.scale(picked, -1.0));

            let terminator = if j + 1 == pair.sentences.len() {
                self.vocab.eos_argument()
            } else {
                self.vocab.eos_sentence()
            };
            for &target in sentence.iter().chain(std::iter::once(&terminator)) {
                let out = self.realize_step(
                    tape, bound, &enc, &real_state, prev_token, plan.s, train, rng,
                );
                real_state = out.state;
                let picked = tape.slice_rows(out.log_probs, target, 1);
                arg_terms.push(tape.scale(picked, -1.0));
                prev_token = target;
            }
        }

        let arg = tape.add_n(&arg_terms);
        let func = tape.add_n(&func_terms);
        let mut total = tape.add(arg, func);
        let sel = if sel_terms.is_empty() {
            None
        } else {
            let sel = tape.add_n(&sel_terms);
            total = tape.add(total, sel);
            Some(sel)
        };

        let parts = LossParts {
            total: tape.value(total).data()[0],
            arg: tape.value(arg).data()[0],
            func: tape.value(func).data()[0],
            sel: sel.map(|s| tape.value(s).data()[0]).unwrap_or(0.0),
            target_tokens: pair.target_tokens(),
        };
        Ok((total, parts))
    }
}

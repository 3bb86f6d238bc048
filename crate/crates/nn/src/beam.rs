//! Beam-search generation with sentence-level reranking. Hypotheses
//! expand token by token; whenever one closes a sentence the live set is
//! re-sorted so beams that have realized more of their planned keyphrases
//! outrank higher-probability beams that realized fewer. Expansions that
//! would repeat a token n-gram are discarded, with the next-best token
//! taking the slot so the beam stays full.

use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use candela_core::dataprep::FunctionLabel;
use candela_core::{CoreError, Result};

use crate::graph::Tape;
use crate::lstm::LstmState;
use crate::model::{label_from_index, ArgModel, Encoded, MemoryCtx, PlanState};
use crate::params::Bound;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub beam_width: usize,
    pub max_tokens: usize,
    pub max_sentences: usize,
    /// Repeating any n-gram of this size is blocked; 0 disables blocking.
    pub block_ngram: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            beam_width: 5,
            max_tokens: 120,
            max_sentences: 10,
            block_ngram: 4,
        }
    }
}

/// One keyphrase handed to the generator: its surface words (for the
/// embedding) and its lowercased content words (the sequence that must
/// appear contiguously in the output for the keyphrase to count as
/// realized).
#[derive(Debug, Clone)]
pub struct GenMemory {
    pub words: Vec<String>,
    pub content: Vec<String>,
}

/// Planner record for one generated sentence.
#[derive(Debug, Clone)]
pub struct SentencePlan {
    /// Memory indices the planner fed into this sentence.
    pub chosen: Vec<usize>,
    pub label: FunctionLabel,
}

#[derive(Debug, Clone)]
pub struct GeneratedArgument {
    /// Output tokens with `</s>` between sentences; terminator stripped.
    pub tokens: Vec<String>,
    pub sentences: Vec<SentencePlan>,
    /// Cumulative log-probability of the emitted tokens.
    pub logprob: f64,
    /// Planned keyphrases whose content sequence appears in the output.
    pub covered: usize,
    /// Set when the beam starved and a greedy pass produced the result.
    pub greedy_fallback: bool,
}

impl GeneratedArgument {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Clone)]
struct Hyp {
    tokens: Vec<usize>,
    logprob: f64,
    plan: PlanState,
    real: LstmState,
    prev: usize,
    used: Vec<bool>,
    sentences_done: usize,
    plans: Vec<SentencePlan>,
    finished: bool,
    needs_plan: bool,
}

/// Candidate expansion ordered for a max-heap: highest score first, ties
/// to the lowest hypothesis index, then the lowest rank.
struct Cand {
    score: f64,
    hyp: usize,
    rank: usize,
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Cand {}
impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.hyp.cmp(&self.hyp))
            .then_with(|| other.rank.cmp(&self.rank))
    }
}

/// Would appending `next` to `tokens` repeat an already-seen n-gram?
fn repeats_ngram(tokens: &[usize], next: usize, n: usize) -> bool {
    if n == 0 || tokens.len() + 1 < n {
        return false;
    }
    let mut gram = tokens[tokens.len() + 1 - n..].to_vec();
    gram.push(next);
    tokens.windows(n).any(|w| w == gram)
}

fn contains_contiguous(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// How many of the hypothesis's planned keyphrases appear in its tokens.
fn count_covered(model: &ArgModel, memory: &[GenMemory], hyp: &Hyp) -> usize {
    let words: Vec<String> = hyp
        .tokens
        .iter()
        .map(|&id| model.vocab.word(id).to_lowercase())
        .collect();
    let mut selected: Vec<usize> = hyp.plans.iter().flat_map(|p| p.chosen.clone()).collect();
    selected.sort_unstable();
    selected.dedup();
    selected
        .into_iter()
        .filter(|&i| contains_contiguous(&words, &memory[i].content))
        .count()
}

/// Sort shared by the sentence-boundary resort and the final pick:
/// covered descending, then log-probability descending, stable for ties.
fn rerank(model: &ArgModel, memory: &[GenMemory], hyps: &mut Vec<Hyp>) {
    let mut decorated: Vec<(usize, Hyp)> = hyps
        .drain(..)
        .map(|h| (count_covered(model, memory, &h), h))
        .collect();
    decorated.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.logprob.total_cmp(&a.1.logprob)));
    hyps.extend(decorated.into_iter().map(|(_, h)| h));
}

/// Runs the planner for the sentence the hypothesis is about to start.
/// Returns false when the planner has nothing left, which finishes the
/// hypothesis.
fn plan_next_sentence(
    model: &ArgModel,
    tape: &mut Tape,
    bound: &Bound,
    mem: &MemoryCtx,
    hyp: &mut Hyp,
    first: bool,
) -> bool {
    match model.plan_step_infer(tape, bound, &hyp.plan, mem, &hyp.used, first) {
        Some(out) => {
            for &i in &out.chosen {
                hyp.used[i] = true;
            }
            let label = if out.function.len() == 2 && out.function[1] > out.function[0] {
                label_from_index(1)
            } else {
                label_from_index(0)
            };
            hyp.plans.push(SentencePlan {
                chosen: out.chosen,
                label,
            });
            hyp.plan = out.state;
            hyp.needs_plan = false;
            true
        }
        None => {
            hyp.finished = true;
            hyp.needs_plan = false;
            false
        }
    }
}

fn initial_hyp(
    model: &ArgModel,
    tape: &mut Tape,
    bound: &Bound,
    enc: &Encoded,
    mem: &MemoryCtx,
) -> Hyp {
    let plan = model.plan_init(tape, enc);
    let real = LstmState::init(tape, model.dims.layers, model.dims.hidden, enc.init);
    let mut hyp = Hyp {
        tokens: Vec::new(),
        logprob: 0.0,
        plan,
        real,
        prev: model.vocab.start(),
        used: vec![false; mem.len()],
        sentences_done: 0,
        plans: Vec::new(),
        finished: false,
        needs_plan: false,
    };
    let planned = plan_next_sentence(model, tape, bound, mem, &mut hyp, true);
    debug_assert!(planned, "the start step cannot stop");
    hyp
}

/// Applies one accepted token to a hypothesis copy.
fn extend(model: &ArgModel, parent: &Hyp, next_real: &LstmState, token: usize, lp: f64, cfg: &GenConfig) -> Hyp {
    let mut hyp = parent.clone();
    hyp.real = next_real.clone();
    hyp.tokens.push(token);
    hyp.logprob += lp;
    hyp.prev = token;
    if token == model.vocab.eos_argument() {
        hyp.finished = true;
    } else if token == model.vocab.eos_sentence() {
        hyp.sentences_done += 1;
        if hyp.sentences_done >= cfg.max_sentences {
            hyp.finished = true;
        } else {
            hyp.needs_plan = true;
        }
    }
    if !hyp.finished && hyp.tokens.len() >= cfg.max_tokens {
        hyp.finished = true;
    }
    hyp
}

/// Full beam pass. `None` means every live hypothesis starved before any
/// could complete.
fn beam_once(
    model: &ArgModel,
    tape: &mut Tape,
    bound: &Bound,
    enc: &Encoded,
    mem: &MemoryCtx,
    memory: &[GenMemory],
    cfg: &GenConfig,
) -> Option<Hyp> {
    let mut live = vec![initial_hyp(model, tape, bound, enc, mem)];
    let mut completed: Vec<Hyp> = Vec::new();
    let mut dummy = ChaCha8Rng::seed_from_u64(0);

    while !live.is_empty() {
        // Expand every live hypothesis by one realizer step.
        let mut next_states = Vec::with_capacity(live.len());
        let mut ranked: Vec<Vec<(usize, f64)>> = Vec::with_capacity(live.len());
        for hyp in &live {
            let out = model.realize_step(
                tape, bound, enc, &hyp.real, hyp.prev, hyp.plan.s, false, &mut dummy,
            );
            let lps = tape.value(out.log_probs).data().to_vec();
            let mut order: Vec<(usize, f64)> =
                lps.iter().copied().enumerate().collect();
            order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            next_states.push(out.state);
            ranked.push(order);
        }

        let mut heap = BinaryHeap::new();
        for (i, hyp) in live.iter().enumerate() {
            heap.push(Cand {
                score: hyp.logprob + ranked[i][0].1,
                hyp: i,
                rank: 0,
            });
        }

        let mut selected: Vec<Hyp> = Vec::with_capacity(cfg.beam_width);
        let mut boundary = false;
        while selected.len() < cfg.beam_width {
            let Some(cand) = heap.pop() else {
                break;
            };
            let (token, lp) = ranked[cand.hyp][cand.rank];
            if cand.rank + 1 < ranked[cand.hyp].len() {
                heap.push(Cand {
                    score: live[cand.hyp].logprob + ranked[cand.hyp][cand.rank + 1].1,
                    hyp: cand.hyp,
                    rank: cand.rank + 1,
                });
            }
            if repeats_ngram(&live[cand.hyp].tokens, token, cfg.block_ngram) {
                continue;
            }
            let hyp = extend(
                model,
                &live[cand.hyp],
                &next_states[cand.hyp],
                token,
                lp,
                cfg,
            );
            if token == model.vocab.eos_sentence() {
                boundary = true;
            }
            selected.push(hyp);
        }

        let mut still_live = Vec::with_capacity(selected.len());
        for mut hyp in selected {
            if !hyp.finished && hyp.needs_plan {
                plan_next_sentence(model, tape, bound, mem, &mut hyp, false);
            }
            if hyp.finished {
                completed.push(hyp);
            } else {
                still_live.push(hyp);
            }
        }
        live = still_live;

        if boundary {
            rerank(model, memory, &mut live);
            live.truncate(cfg.beam_width);
        }
    }

    if completed.is_empty() {
        return None;
    }
    rerank(model, memory, &mut completed);
    Some(completed.remove(0))
}

/// Straightforward greedy decoding under the same emission rules: best
/// unblocked token each step. Exists both as the `beam_width = 1`
/// reference and as the fallback when the beam starves.
fn greedy_once(
    model: &ArgModel,
    tape: &mut Tape,
    bound: &Bound,
    enc: &Encoded,
    mem: &MemoryCtx,
    cfg: &GenConfig,
    block: bool,
) -> Hyp {
    let mut hyp = initial_hyp(model, tape, bound, enc, mem);
    let mut dummy = ChaCha8Rng::seed_from_u64(0);
    while !hyp.finished {
        let out = model.realize_step(
            tape, bound, enc, &hyp.real, hyp.prev, hyp.plan.s, false, &mut dummy,
        );
        let lps = tape.value(out.log_probs).data().to_vec();
        let mut order: Vec<(usize, f64)> = lps.iter().copied().enumerate().collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let Some(&(token, lp)) = order.iter().find(|(t, _)| {
            !block || !repeats_ngram(&hyp.tokens, *t, cfg.block_ngram)
        }) else {
            break;
        };
        hyp = extend(model, &hyp, &out.state, token, lp, cfg);
        if !hyp.finished && hyp.needs_plan {
            plan_next_sentence(model, tape, bound, mem, &mut hyp, false);
        }
    }
    hyp
}

fn assemble(
    model: &ArgModel,
    memory: &[GenMemory],
    mut hyp: Hyp,
    greedy_fallback: bool,
) -> GeneratedArgument {
    if let Some(&last) = hyp.tokens.last() {
        if last == model.vocab.eos_argument() || last == model.vocab.eos_sentence() {
            hyp.tokens.pop();
        }
    }
    let covered = count_covered(model, memory, &hyp);
    GeneratedArgument {
        tokens: hyp.tokens.iter().map(|&id| model.vocab.word(id).to_string()).collect(),
        sentences: hyp.plans,
        logprob: hyp.logprob,
        covered,
        greedy_fallback,
    }
}

/// Generates one argument for an encoded input and keyphrase memory.
pub fn generate(
    model: &ArgModel,
    input_ids: &[usize],
    memory: &[GenMemory],
    cfg: &GenConfig,
) -> Result<GeneratedArgument> {
    if cfg.beam_width == 0 {
        return Err(CoreError::invalid("beam width must be at least 1"));
    }
    if cfg.max_tokens == 0 || cfg.max_sentences == 0 {
        return Err(CoreError::invalid(
            "token and sentence budgets must be at least 1",
        ));
    }
    let mut tape = Tape::new();
    let bound = model.params.bind(&mut tape);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let enc = model.encode(&mut tape, &bound, input_ids, false, &mut rng)?;
    let memory_ids: Vec<Vec<usize>> = memory
        .iter()
        .map(|m| model.vocab.encode(&m.words))
        .collect();
    let mem = model.memory_ctx(&mut tape, &bound, &memory_ids);

    match beam_once(model, &mut tape, &bound, &enc, &mem, memory, cfg) {
        Some(best) => Ok(assemble(model, memory, best, false)),
        None => {
            let hyp = greedy_once(model, &mut tape, &bound, &enc, &mem, cfg, false);
            Ok(assemble(model, memory, hyp, true))
        }
    }
}

/// Greedy decoding as a standalone entry point.
pub fn greedy_decode(
    model: &ArgModel,
    input_ids: &[usize],
    memory: &[GenMemory],
    cfg: &GenConfig,
) -> Result<GeneratedArgument> {
    if cfg.max_tokens == 0 || cfg.max_sentences == 0 {
        return Err(CoreError::invalid(
            "token and sentence budgets must be at least 1",
        ));
    }
    let mut tape = Tape::new();
    let bound = model.params.bind(&mut tape);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let enc = model.encode(&mut tape, &bound, input_ids, false, &mut rng)?;
    let memory_ids: Vec<Vec<usize>> = memory
        .iter()
        .map(|m| model.vocab.encode(&m.words))
        .collect();
    let mem = model.memory_ctx(&mut tape, &bound, &memory_ids);
    let hyp = greedy_once(model, &mut tape, &bound, &enc, &mem, cfg, true);
    Ok(assemble(model, memory, hyp, false))
}

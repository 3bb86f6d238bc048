//! Neural components: reverse-mode autodiff on f64 tensors, a two-layer
//! LSTM encoder/decoder with a text planner, AdaGrad training, and
//! reranking beam search.

pub mod beam;
pub mod gradcheck;
pub mod graph;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod params;
pub mod tensor;
pub mod train;
pub mod vocab;

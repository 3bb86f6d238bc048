//! Training-data preparation: argumentative-function labels for gold
//! sentences, keyphrase-selection labels, and assembly of capped
//! statement/passage/argument token records.

mod labels;
mod pair;

pub use labels::{
    label_functions, leading_marker, pronoun_list, selection_labels, FunctionLabel, Selected,
};
pub use pair::{
    read_pairs, write_pairs, GenerationInput, MemoryEntry, PairAssembler, TrainingPair,
};

//! One module per pipeline phase; each public function backs a subcommand.

pub mod corpus;
pub mod eval;
pub mod model;
pub mod prep;
pub mod retrieval;

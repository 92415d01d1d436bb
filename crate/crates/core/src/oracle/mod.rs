//! Brute-force checking of the analysis against small concrete documents.

mod check;
mod document;
mod enumerate;
mod eval;
mod validate;

pub use check::{
    check_completeness, observed_next_siblings, CheckError, CompletenessReport, Counterexample, Coverage,
};
pub use document::{DocNode, Document, Node};
pub use enumerate::{enumerate_documents, words, EnumConfig, Enumeration, Interleave};
pub use eval::{axis_nodes, matches_test, EvalError, Evaluator, Value};
pub use validate::Validator;

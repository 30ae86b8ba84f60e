//! Ground normal logic programs: reduct, least and stable models, and atom
//! dependency graphs.

mod atom;
mod graph;
pub(crate) mod parse;
mod program;
mod semantics;

use thiserror::Error;

pub use atom::{Atom, Clause, Constant, Literal, Symbol};
pub use graph::{DependencyGraph, Height};
pub use parse::{parse_atom, parse_program};
pub use program::{GroundProgram, Interpretation};
pub use semantics::{
    gl_reduct, head_set, is_stable_model, least_model, stable_model_acyclic,
    stable_models_bruteforce, AcyclicEvaluator, DEFAULT_BRUTEFORCE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("program contains negative literals")]
    NotNegationFree,
    #[error("program's dependency graph has a cycle")]
    Cyclic,
    #[error("universe of {size} atoms exceeds brute-force cap {cap}")]
    UniverseTooLarge { size: usize, cap: usize },
    #[error("unknown atom {0}")]
    UnknownAtom(Atom),
}

pub fn dependency_graph(p: &GroundProgram) -> DependencyGraph {
    DependencyGraph::from_program(p)
}

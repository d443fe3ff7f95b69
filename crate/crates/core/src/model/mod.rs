//! Core graph objects: DAGs, moral graphs, tree decompositions and
//! elimination orderings.
//!
//! Vertices are dense ids `0..n`. Every type here is immutable once built
//! and every operation is a pure function.

mod dag;
mod elimination;
mod graph;
mod pace;
mod td;

pub use dag::{is_acyclic, topological_sort, Dag};
pub use elimination::{
    fill_in_closure, min_fill_ordering, td_from_elimination, width_of_elimination,
    EliminationOrdering,
};
pub use graph::{moralize, Graph, MoralGraph};
pub use pace::{parse_pace_td, write_pace_td};
pub use td::{validate_td, TdViolation, TreeDecomposition};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("vertex {0} is its own parent")]
    SelfLoop(usize),
    #[error("parent sets contain a directed cycle")]
    Cycle,
    #[error("ordering is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("tree decomposition covers {td} vertices but the graph has {graph}")]
    UniverseMismatch { td: usize, graph: usize },
    #[error("tree edge ({0}, {1}) references a missing bag")]
    BadTreeEdge(usize, usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

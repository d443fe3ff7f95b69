//! Anytime learning of bounded-treewidth Bayesian network structures.
//!
//! A heuristic DAG and tree decomposition are improved by repeatedly cutting
//! out a small subtree of the decomposition, solving the induced local
//! problem exactly as a weighted partial MaxSAT instance, and merging the
//! local optimum back. Virtual edges and conditional virtual arcs keep the
//! merged result acyclic and within the treewidth bound.

pub mod bench;
pub mod encoding;
pub mod engine;
pub mod heuristic;
pub mod model;
pub mod scoring;
pub mod solver;
pub mod subinstance;

//! Data ingestion, BIC parent-set scores, the pruned score cache and ΔBIC
//! reporting.

mod bic;
mod cache;
mod data;
mod delta;
mod jkl;

pub use bic::{bic_score, mutual_information};
pub use cache::{
    build_cache, build_cache_with, dag_score, prune, CacheOptions, ParentSetScore, ScoreCache,
};
pub use data::Dataset;
pub use delta::{delta_bic, BicCategory, DeltaBicReport};
pub use jkl::{parse_jkl, write_jkl};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("vertex {vertex} out of range for {count} variables")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("variable {0} cannot be its own parent")]
    SelfParent(usize),
    #[error("parent configurations of variable {0} overflow")]
    TooManyConfigurations(usize),
    #[error("variable {0} has no empty parent set")]
    MissingEmptySet(usize),
    #[error("variable {0} has a non-finite score")]
    NonFiniteScore(usize),
    #[error("parent set {parents:?} of vertex {vertex} is not in the score cache")]
    MissingParentSet { vertex: usize, parents: Vec<usize> },
    #[error("cache has {cache} variables but the DAG has {dag}")]
    SizeMismatch { cache: usize, dag: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

//! In-memory reference executors: a SPARQL evaluator over a
//! [`KnowledgeGraph`](crate::model::KnowledgeGraph) and an aggregation
//! pipeline interpreter over subject-grouped documents.

mod filter;
mod matcher;
mod pipeline;
mod sparql;
mod value;

pub use filter::{compare, eval_filter, Truth};
pub use matcher::{compile as compile_match, Cond, Operand};
pub use pipeline::{bindings_from_rows, eval_pipeline, DocumentStore};
pub use sparql::{eval_sparql, order_keys};
pub use value::DocValue;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("unknown pipeline stage {0}")]
    UnknownStage(String),
    #[error("unknown collection {0}")]
    UnknownCollection(String),
    #[error("missing projection: {0}")]
    MissingProjection(String),
    #[error("malformed pipeline: {0}")]
    MalformedPipeline(String),
}

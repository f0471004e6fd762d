//! Per-Smart-Object knowledge: human-word terms, level-tagged triples,
//! observations and the partitioned store that holds them.

pub mod format;
pub mod store;
pub mod term;
pub mod triple;

use thiserror::Error;

pub use format::{deserialize_store, serialize_store, STORE_HEADER};
pub use store::{
    AssertOutcome, Hypothesis, HypothesisState, KnowledgeStore, Path, TriplePattern,
};
pub use term::{node, term, NodeId, Term, Tick};
pub use triple::{KnowledgeLevel, Observation, PredicateVocabulary, Triple, TripleKey, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnowledgeError {
    #[error("term `{0}` is empty after normalization")]
    EmptyTerm(String),
    #[error("`{0}` is not a canonical term")]
    NonCanonicalTerm(String),
    #[error("invalid node id `{0}`")]
    InvalidNodeId(String),
    #[error("unknown knowledge level `{0}`")]
    UnknownLevel(String),
    #[error("value {0} is not finite")]
    NonFiniteValue(String),
    #[error("predicate `{0}` is not in the vocabulary")]
    UnknownPredicate(Term),
    #[error("{key} is stored at {stored}, cannot assert it at {attempted}")]
    LevelConflict {
        key: TripleKey,
        stored: KnowledgeLevel,
        attempted: KnowledgeLevel,
    },
    #[error("{0} is not stored")]
    NotFound(TripleKey),
    #[error("partition discipline violated: {0}")]
    PartitionViolation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn synonymous_to() -> Term {
    term("synonymous_to")
}

pub(crate) fn element_of() -> Term {
    term("element_of")
}

pub(crate) fn is_a() -> Term {
    term("is_a")
}

pub(crate) fn classifies() -> Term {
    term("classifies")
}

pub(crate) fn measured_by() -> Term {
    term("measured_by")
}

pub(crate) fn sensor() -> Term {
    term("sensor")
}

pub(crate) fn event() -> Term {
    term("event")
}

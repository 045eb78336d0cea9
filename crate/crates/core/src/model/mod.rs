//! Domain types: variables and their bin schemes, DAGs, conditional
//! probability tables, expert constraints and evidence.
//!
//! Every type validates its invariants at construction and is immutable
//! afterwards; "mutating" operations return new values.

mod catalog;
mod constraints;
mod cpt;
mod dag;
mod evidence;

pub use catalog::{BinScheme, VariableCatalog, VariableKind, VariableSpec};
pub use constraints::{ConstraintFile, KnowledgeConstraints, Violation};
pub use cpt::Cpt;
pub use dag::Dag;
pub use evidence::EvidenceSet;

use thiserror::Error;

/// Errors raised when a model-core invariant would be broken.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("catalog must contain exactly one target variable, found {0}")]
    TargetCount(usize),
    #[error("invalid bin scheme: {0}")]
    InvalidBinScheme(String),
    #[error("edge {0} -> {1} would close a directed cycle")]
    Cycle(String, String),
    #[error("edge {0} -> {1} already present")]
    DuplicateEdge(String, String),
    #[error("edge {0} -> {1} not present")]
    MissingEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("invalid CPT for `{node}`: {reason}")]
    InvalidCpt { node: String, reason: String },
    #[error("edge {0} -> {1} is both forced and forbidden")]
    ForcedAndForbidden(String, String),
    #[error("forced edges are inconsistent: {0}")]
    InconsistentForced(String),
    #[error("bin {bin} out of range for `{variable}` ({bins} bins)")]
    BinOutOfRange {
        variable: String,
        bin: usize,
        bins: usize,
    },
    #[error("target variable `{0}` may not be used as evidence for a forecast")]
    TargetAsEvidence(String),
    #[error("malformed constraint file: {0}")]
    ConstraintFormat(String),
}

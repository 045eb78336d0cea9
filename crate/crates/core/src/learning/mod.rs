//! Structure search, parameter estimation and the learned-model file format.

mod counts;
mod cpdag;
mod em;
mod model_file;
mod params;
mod score;
mod search;

pub use cpdag::{markov_equivalent, EquivalenceClass};
pub use em::{em_fit, EmResult};
pub use model_file::{LearnedModel, ModelCpt, ModelEdge, ModelFile, ModelVariable, MODEL_VERSION};
pub use params::fit_parameters;
pub use score::{bic_score, ScoredStructure};
pub use search::{learn_structure, SearchConfig};

use thiserror::Error;

use crate::inference::InferenceError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearningError {
    #[error("dataset has no rows")]
    EmptyData,
    #[error("no data for parent configuration {row} of `{node}` and alpha = 0")]
    EmptyFamily { node: String, row: usize },
    #[error("constraints cannot be satisfied: {0}")]
    InfeasibleConstraints(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("variable `{0}` is never observed")]
    UnobservedVariable(String),
    #[error("{0}")]
    CatalogMismatch(String),
    #[error("malformed model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

//! Discrete Bayesian networks for county-level corn yield forecasting.
//!
//! The crate covers the whole path from daily weather records to yield
//! posteriors: [`pipeline`] turns raw panels into binned data, [`learning`]
//! searches for a constrained DAG and fits its CPTs, [`inference`] answers
//! posterior and expected-yield queries, and [`analysis`] evaluates forecasts
//! and runs what-if sweeps. [`synthetic`] generates networks and panels for
//! tests and demos.

pub mod analysis;
pub mod inference;
pub mod learning;
pub mod model;
pub mod pipeline;
pub mod synthetic;

pub use inference::{BayesNet, Posterior, YieldForecast};
pub use learning::{LearnedModel, ScoredStructure, SearchConfig};
pub use model::{
    BinScheme, Cpt, Dag, EvidenceSet, KnowledgeConstraints, VariableCatalog, VariableKind, VariableSpec,
};
pub use pipeline::{DiscretizedDataset, RawPanel};

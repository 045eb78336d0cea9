//! Exact posterior computation, expected-yield forecasts and edge strengths.

mod elimination;
mod factor;
mod forecast;
mod network;
mod strength;

pub use elimination::{evidence_probability, joint_posterior, min_fill_order, unnormalized, IMPOSSIBLE_MASS};
pub use factor::Factor;
pub use forecast::{
    expected_from_probs, expected_yield, posterior, posterior_with_order, Posterior, YieldForecast,
};
pub use network::BayesNet;
pub use strength::{strength_of_influence, total_variation};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("evidence is impossible under the model (probability {mass:e})")]
    ImpossibleEvidence { mass: f64 },
    #[error("query variable `{0}` is also observed")]
    QueryObserved(String),
    #[error("target `{0}` has no bin means")]
    MissingBinMeans(String),
    #[error("edge {0} -> {1} is not in the network")]
    UnknownEdge(String, String),
    #[error("elimination order must cover each hidden variable exactly once")]
    InvalidOrder,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error(transparent)]
    Model(ModelError),
}

//! Evaluation metrics, gradual-evidence sweeps and what-if scenarios.

mod metrics;
mod report;
mod sweep;

pub use metrics::{
    accuracy_at_threshold, confusion_matrix, confusion_matrix_labelled, county_error, ConfusionMatrix,
};
pub use report::{
    cases_from_dataset, evaluate, CountyResult, EvalCase, EvaluationReport, SkippedCase, ThresholdCount,
};
pub use sweep::{evidence_sweep, whatif, EvidenceSchedule, SweepStep, WhatIfEntry};

use thiserror::Error;

use crate::inference::InferenceError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("bin {bin} out of range ({bins} bins)")]
    BinOutOfRange { bin: usize, bins: usize },
    #[error("actual yield must be positive, got {0}")]
    NonPositiveActual(f64),
    #[error("evidence schedule is empty")]
    EmptySchedule,
    #[error("step `{0}` drops evidence from the previous step")]
    NotMonotone(String),
    #[error("`{0}` is the target variable")]
    TargetVariable(String),
    #[error("`{0}` is already part of the base evidence")]
    AlreadyObserved(String),
    #[error("step `{label}`: {source}")]
    Step {
        label: String,
        #[source]
        source: InferenceError,
    },
    #[error(transparent)]
    Inference(InferenceError),
    #[error("i/o error: {0}")]
    Io(String),
}

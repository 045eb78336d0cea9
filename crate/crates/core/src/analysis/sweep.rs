use serde::Serialize;

use crate::inference::{expected_yield, BayesNet, InferenceError, YieldForecast};
use crate::model::EvidenceSet;

use super::AnalysisError;

/// Labelled evidence sets, each containing the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceSchedule {
    steps: Vec<(String, EvidenceSet)>,
}

impl EvidenceSchedule {
    pub fn new(steps: Vec<(String, EvidenceSet)>) -> Result<Self, AnalysisError> {
        if steps.is_empty() {
            return Err(AnalysisError::EmptySchedule);
        }
        for w in steps.windows(2) {
            if !w[0].1.is_subset_of(&w[1].1) {
                return Err(AnalysisError::NotMonotone(w[1].0.clone()));
            }
        }
        Ok(EvidenceSchedule { steps })
    }

    pub fn steps(&self) -> &[(String, EvidenceSet)] {
        &self.steps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStep {
    pub label: String,
    pub forecast: YieldForecast,
}

/// One expected-yield forecast per schedule step, in order.
pub fn evidence_sweep(net: &BayesNet, schedule: &EvidenceSchedule) -> Result<Vec<SweepStep>, AnalysisError> {
    schedule
        .steps
        .iter()
        .map(|(label, ev)| {
            let forecast = expected_yield(net, ev).map_err(|source| AnalysisError::Step {
                label: label.clone(),
                source,
            })?;
            Ok(SweepStep {
                label: label.clone(),
                forecast,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIfEntry {
    pub bin: usize,
    pub label: String,
    /// `None` when this bin is impossible given the base evidence.
    pub expected_yield: Option<f64>,
}

/// Expected yield with `variable` set to each of its bins in turn.
pub fn whatif(net: &BayesNet, variable: &str, base: &EvidenceSet) -> Result<Vec<WhatIfEntry>, AnalysisError> {
    let catalog = net.catalog();
    let spec = catalog
        .by_name(variable)
        .map_err(|_| AnalysisError::Inference(InferenceError::UnknownVariable(variable.to_string())))?;
    if spec.name == catalog.target().name {
        return Err(AnalysisError::TargetVariable(variable.to_string()));
    }
    if base.contains(variable) {
        return Err(AnalysisError::AlreadyObserved(variable.to_string()));
    }
    spec.bins
        .labels()
        .iter()
        .enumerate()
        .map(|(bin, label)| {
            let expected_yield = match expected_yield(net, &base.with(variable, bin)) {
                Ok(f) => Some(f.expected_yield),
                Err(InferenceError::ImpossibleEvidence { .. }) => None,
                Err(e) => return Err(AnalysisError::Inference(e)),
            };
            Ok(WhatIfEntry {
                bin,
                label: label.clone(),
                expected_yield,
            })
        })
        .collect()
}

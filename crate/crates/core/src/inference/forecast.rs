use serde::Serialize;

use crate::model::EvidenceSet;

use super::elimination::{unnormalized, IMPOSSIBLE_MASS};
use super::network::BayesNet;
use super::InferenceError;

/// Distribution over the bins of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    pub variable: String,
    pub probs: Vec<f64>,
}

impl Posterior {
    /// Index of the most probable bin; ties go to the lower bin.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YieldForecast {
    pub posterior: Posterior,
    pub expected_yield: f64,
    pub evidence_used: EvidenceSet,
}

/// Exact `P(query | evidence)`.
pub fn posterior(net: &BayesNet, evidence: &EvidenceSet, query: &str) -> Result<Posterior, InferenceError> {
    run(net, evidence, query, None)
}

/// As [`posterior`], eliminating hidden variables in the given order.
/// Names that are not hidden for this query are skipped.
pub fn posterior_with_order(
    net: &BayesNet,
    evidence: &EvidenceSet,
    query: &str,
    order: &[&str],
) -> Result<Posterior, InferenceError> {
    let order: Vec<usize> = order
        .iter()
        .map(|n| net.index_of(n))
        .collect::<Result<_, _>>()?;
    run(net, evidence, query, Some(&order))
}

fn run(
    net: &BayesNet,
    evidence: &EvidenceSet,
    query: &str,
    order: Option<&[usize]>,
) -> Result<Posterior, InferenceError> {
    let q = net.index_of(query)?;
    let dense = evidence.to_dense(net.catalog())?;
    let mut f = unnormalized(net, &dense, &[q], order)?;
    let mass = f.normalize();
    if mass < IMPOSSIBLE_MASS {
        return Err(InferenceError::ImpossibleEvidence { mass });
    }
    Ok(Posterior {
        variable: query.to_string(),
        probs: f.values().to_vec(),
    })
}

/// `Σ probs[n] · means[n]`, accumulated in bin order.
pub fn expected_from_probs(probs: &[f64], means: &[f64]) -> f64 {
    probs.iter().zip(means).fold(0.0, |acc, (p, m)| acc + p * m)
}

/// Posterior over the target plus the posterior-weighted mean of its bin means.
pub fn expected_yield(net: &BayesNet, evidence: &EvidenceSet) -> Result<YieldForecast, InferenceError> {
    let target = net.catalog().target();
    let means = target
        .bins
        .bin_means()
        .ok_or_else(|| InferenceError::MissingBinMeans(target.name.clone()))?;
    let post = posterior(net, evidence, &target.name)?;
    let expected_yield = expected_from_probs(&post.probs, means);
    Ok(YieldForecast {
        posterior: post,
        expected_yield,
        evidence_used: evidence.clone(),
    })
}

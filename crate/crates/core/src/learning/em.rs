//! Expectation maximization for CPTs under missing cells.

use std::collections::BTreeMap;

use crate::inference::{unnormalized, BayesNet};
use crate::model::{Cpt, Dag};
use crate::pipeline::DiscretizedDataset;

use super::counts::{check_alignment, family_counts, FamilyCounts};
use super::params::cpt_from_counts;
use super::LearningError;

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    /// Final CPTs in node order.
    pub cpts: Vec<Cpt>,
    /// Observed-data log-likelihood of the initial and every updated
    /// parameter set.
    pub log_likelihoods: Vec<f64>,
    /// The quantity EM climbs: the log-likelihood plus `alpha · Σ ln θ`
    /// (a Dirichlet log-prior) when `alpha > 0`; equal to the
    /// log-likelihood otherwise.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iters` ran out first; the parameters are still usable.
    pub converged: bool,
}

/// Fit CPTs for `dag` by EM. Each E-step conditions on a row's observed
/// cells and computes exact family posteriors; each M-step applies the
/// smoothed estimator to the expected counts.
///
/// Starts from available-case estimates smoothed with `max(alpha, 1)`. With
/// `alpha = 0`, a parent configuration with no expected mass keeps its
/// previous row.
pub fn em_fit(
    dag: &Dag,
    data: &DiscretizedDataset,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<EmResult, LearningError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(LearningError::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }
    if data.is_empty() {
        return Err(LearningError::EmptyData);
    }
    check_alignment(dag, data)?;
    let catalog = data.catalog();
    let n = dag.len();
    for i in 0..n {
        if data.rows().iter().all(|r| r.bins[i].is_none()) {
            return Err(LearningError::UnobservedVariable(dag.name(i).to_string()));
        }
    }
    let cards = catalog.cardinalities();

    // identical observation patterns share one E-step
    let mut patterns: BTreeMap<Vec<Option<usize>>, f64> = BTreeMap::new();
    for row in data.rows() {
        *patterns.entry(row.bins.clone()).or_insert(0.0) += 1.0;
    }
    let patterns: Vec<(Vec<Option<usize>>, f64)> = patterns.into_iter().collect();

    let init_alpha = alpha.max(1.0);
    let mut cpts: Vec<Cpt> = (0..n)
        .map(|i| {
            let fc = family_counts(data, i, dag.parents_of(i), &cards);
            cpt_from_counts(dag, i, &fc, init_alpha, None)
        })
        .collect::<Result<_, _>>()?;

    let objective = |ll: f64, cpts: &[Cpt]| {
        if alpha > 0.0 {
            ll + alpha * cpts.iter().flat_map(|c| c.table()).map(|p| p.ln()).sum::<f64>()
        } else {
            ll
        }
    };

    let net = BayesNet::new(catalog.clone(), dag.clone(), cpts.clone())?;
    let (mut counts, ll) = e_step(&net, &patterns, &cards)?;
    let mut log_likelihoods = vec![ll];
    let mut objectives = vec![objective(ll, &cpts)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        cpts = (0..n)
            .map(|i| cpt_from_counts(dag, i, &counts[i], alpha, Some(&cpts[i])))
            .collect::<Result<_, _>>()?;
        let net = BayesNet::new(catalog.clone(), dag.clone(), cpts.clone())?;
        let (next, ll) = e_step(&net, &patterns, &cards)?;
        counts = next;
        let obj = objective(ll, &cpts);
        let gain = obj - objectives.last().copied().expect("non-empty");
        log_likelihoods.push(ll);
        objectives.push(obj);
        if gain < tol {
            converged = true;
            break;
        }
    }
    Ok(EmResult {
        cpts,
        log_likelihoods,
        objectives,
        iterations,
        converged,
    })
}

/// Expected family counts and observed-data log-likelihood under `net`.
fn e_step(
    net: &BayesNet,
    patterns: &[(Vec<Option<usize>>, f64)],
    cards: &[usize],
) -> Result<(Vec<FamilyCounts>, f64), LearningError> {
    let dag = net.dag();
    let n = dag.len();
    let mut counts: Vec<FamilyCounts> = (0..n)
        .map(|i| FamilyCounts::zeros(cards[i], dag.parents_of(i).iter().map(|&p| cards[p]).collect()))
        .collect();
    let mut ll = 0.0;
    for (pattern, weight) in patterns {
        let mass = unnormalized(net, pattern, &[], None)?.total();
        if mass <= 0.0 {
            return Err(LearningError::Inference(
                crate::inference::InferenceError::ImpossibleEvidence { mass },
            ));
        }
        ll += weight * mass.ln();
        for i in 0..n {
            let parents = dag.parents_of(i);
            let mut family: Vec<usize> = parents.to_vec();
            family.push(i);
            let hidden: Vec<usize> = {
                let mut h: Vec<usize> = family.iter().copied().filter(|&v| pattern[v].is_none()).collect();
                h.sort_unstable();
                h
            };
            let fc = &mut counts[i];
            if hidden.is_empty() {
                let j = parents.iter().fold(0, |acc, &p| acc * cards[p] + pattern[p].expect("observed"));
                fc.counts[j * fc.card + pattern[i].expect("observed")] += weight;
                continue;
            }
            let mut f = unnormalized(net, pattern, &hidden, None)?;
            let z = f.total();
            if z <= 0.0 {
                continue;
            }
            f.normalize();
            let mut state = pattern.clone();
            let mut assign = vec![0usize; hidden.len()];
            for &p in f.values() {
                for (&v, &s) in hidden.iter().zip(&assign) {
                    state[v] = Some(s);
                }
                if p > 0.0 {
                    let j = parents.iter().fold(0, |acc, &q| acc * cards[q] + state[q].expect("filled"));
                    fc.counts[j * fc.card + state[i].expect("filled")] += weight * p;
                }
                for k in (0..assign.len()).rev() {
                    assign[k] += 1;
                    if assign[k] < cards[hidden[k]] {
                        break;
                    }
                    assign[k] = 0;
                }
            }
        }
    }
    Ok((counts, ll))
}

use std::collections::BTreeMap;

use crate::model::Dag;
use crate::pipeline::DiscretizedDataset;

use super::counts::{check_alignment, family_counts, FamilyCounts};
use super::LearningError;

/// A DAG with its BIC score (higher is better) and per-node terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredStructure {
    pub dag: Dag,
    pub score: f64,
    pub per_node_scores: BTreeMap<String, f64>,
}

/// BIC term of one family:
/// `Σ n_jk ln(n_jk / n_j) − (ln N / 2) · q · (r − 1)`.
///
/// With missing cells the log-likelihood is taken over the rows where the
/// whole family is observed and rescaled by `N / used`, so families are
/// compared on the same number of rows.
pub(crate) fn family_bic(fc: &FamilyCounts, n_total: usize) -> f64 {
    let mut loglik = 0.0;
    for j in 0..fc.configs() {
        let row = fc.row(j);
        let nj: f64 = row.iter().sum();
        for &n in row {
            if n > 0.0 {
                loglik += n * (n / nj).ln();
            }
        }
    }
    if fc.used == 0 {
        loglik = 0.0;
    } else if fc.used != n_total {
        loglik *= n_total as f64 / fc.used as f64;
    }
    let params = (fc.configs() * (fc.card - 1)) as f64;
    loglik - (n_total as f64).ln() / 2.0 * params
}

pub(crate) fn node_score(data: &DiscretizedDataset, node: usize, parents: &[usize], cards: &[usize]) -> f64 {
    family_bic(&family_counts(data, node, parents, cards), data.len())
}

pub fn bic_score(dag: &Dag, data: &DiscretizedDataset) -> Result<ScoredStructure, LearningError> {
    if data.is_empty() {
        return Err(LearningError::EmptyData);
    }
    check_alignment(dag, data)?;
    let cards = data.catalog().cardinalities();
    let mut per_node_scores = BTreeMap::new();
    let mut score = 0.0;
    for i in 0..dag.len() {
        let s = node_score(data, i, dag.parents_of(i), &cards);
        score += s;
        per_node_scores.insert(dag.name(i).to_string(), s);
    }
    Ok(ScoredStructure {
        dag: dag.clone(),
        score,
        per_node_scores,
    })
}

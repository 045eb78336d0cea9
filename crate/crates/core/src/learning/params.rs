use crate::model::{Cpt, Dag};
use crate::pipeline::DiscretizedDataset;

use super::counts::{check_alignment, family_counts, FamilyCounts};
use super::LearningError;

/// `(n_jk + alpha) / (n_j + alpha · r)` for every row. A row with no mass
/// takes `fallback(j)` when given, otherwise fails with `EmptyFamily`.
pub(crate) fn cpt_from_counts(
    dag: &Dag,
    node: usize,
    fc: &FamilyCounts,
    alpha: f64,
    fallback: Option<&Cpt>,
) -> Result<Cpt, LearningError> {
    let r = fc.card as f64;
    let mut rows = Vec::with_capacity(fc.configs());
    for j in 0..fc.configs() {
        let counts = fc.row(j);
        let denom = counts.iter().sum::<f64>() + alpha * r;
        if denom > 0.0 {
            rows.push(counts.iter().map(|&n| (n + alpha) / denom).collect());
        } else if let Some(prev) = fallback {
            rows.push(prev.row(j).to_vec());
        } else {
            return Err(LearningError::EmptyFamily {
                node: dag.name(node).to_string(),
                row: j,
            });
        }
    }
    Ok(Cpt::new(
        dag.name(node),
        dag.parents_of(node).iter().map(|&p| dag.name(p).to_string()).collect(),
        fc.parent_cards.clone(),
        fc.card,
        rows,
    )?)
}

/// Smoothed maximum-likelihood CPTs, in node order. Rows with a missing cell
/// in a family are left out of that family's counts.
pub fn fit_parameters(dag: &Dag, data: &DiscretizedDataset, alpha: f64) -> Result<Vec<Cpt>, LearningError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(LearningError::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }
    check_alignment(dag, data)?;
    let cards = data.catalog().cardinalities();
    (0..dag.len())
        .map(|i| {
            let fc = family_counts(data, i, dag.parents_of(i), &cards);
            cpt_from_counts(dag, i, &fc, alpha, None)
        })
        .collect()
}

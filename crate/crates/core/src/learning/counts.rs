use crate::model::Dag;
use crate::pipeline::DiscretizedDataset;

use super::LearningError;

/// Sufficient statistics `n_jk` for one family, `j` the parent configuration
/// (mixed radix, first parent most significant) and `k` the child bin.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FamilyCounts {
    pub card: usize,
    pub parent_cards: Vec<usize>,
    /// `counts[j * card + k]`
    pub counts: Vec<f64>,
    /// Rows that contributed.
    pub used: usize,
}

impl FamilyCounts {
    pub fn zeros(card: usize, parent_cards: Vec<usize>) -> Self {
        let q: usize = parent_cards.iter().product();
        FamilyCounts {
            card,
            parent_cards,
            counts: vec![0.0; q * card],
            used: 0,
        }
    }

    pub fn configs(&self) -> usize {
        self.counts.len() / self.card
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.counts[j * self.card..(j + 1) * self.card]
    }
}

/// Available-case counts: rows with the child or any parent missing are skipped.
pub(crate) fn family_counts(
    data: &DiscretizedDataset,
    node: usize,
    parents: &[usize],
    cards: &[usize],
) -> FamilyCounts {
    let mut fc = FamilyCounts::zeros(cards[node], parents.iter().map(|&p| cards[p]).collect());
    'rows: for row in data.rows() {
        let Some(k) = row.bins[node] else { continue };
        let mut j = 0;
        for &p in parents {
            match row.bins[p] {
                Some(b) => j = j * cards[p] + b,
                None => continue 'rows,
            }
        }
        fc.counts[j * fc.card + k] += 1.0;
        fc.used += 1;
    }
    fc
}

/// Check that `dag` lists exactly the dataset's variables, in catalog order.
pub(crate) fn check_alignment(dag: &Dag, data: &DiscretizedDataset) -> Result<(), LearningError> {
    if dag.nodes().iter().map(String::as_str).eq(data.catalog().names()) {
        Ok(())
    } else {
        Err(LearningError::CatalogMismatch(
            "DAG nodes must match the dataset variables in catalog order".into(),
        ))
    }
}

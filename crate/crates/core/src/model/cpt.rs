use super::ModelError;

const ROW_TOLERANCE: f64 = 1e-9;

/// Conditional probability table `P(node | parents)`.
///
/// Rows enumerate parent configurations in mixed radix with the first listed
/// parent most significant: for parents `(A, B)` with 2 and 3 bins the row
/// order is `(0,0) (0,1) (0,2) (1,0) (1,1) (1,2)`. The serialized model
/// depends on this order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    node: String,
    parents: Vec<String>,
    parent_cards: Vec<usize>,
    card: usize,
    table: Vec<f64>,
}

impl Cpt {
    /// `rows[j]` is the distribution over the node's bins for configuration `j`.
    pub fn new(
        node: impl Into<String>,
        parents: Vec<String>,
        parent_cards: Vec<usize>,
        card: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let node = node.into();
        let bad = |reason: String| ModelError::InvalidCpt {
            node: node.clone(),
            reason,
        };
        if parents.len() != parent_cards.len() {
            return Err(bad("parent list and cardinalities differ in length".into()));
        }
        if card == 0 || parent_cards.contains(&0) {
            return Err(bad("zero cardinality".into()));
        }
        let expected_rows: usize = parent_cards.iter().product();
        if rows.len() != expected_rows {
            return Err(bad(format!("{} rows, expected {expected_rows}", rows.len())));
        }
        let mut table = Vec::with_capacity(expected_rows * card);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != card {
                return Err(bad(format!("row {j} has width {}, expected {card}", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(bad(format!("row {j} has an entry outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(bad(format!("row {j} sums to {sum}")));
            }
            table.extend(row);
        }
        Ok(Cpt {
            node,
            parents,
            parent_cards,
            card,
            table,
        })
    }

    pub fn node(&self) -> &str {
        &self.node
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn row_count(&self) -> usize {
        self.table.len() / self.card
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.table[j * self.card..(j + 1) * self.card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.card)
    }

    /// Flat row-major table (`row_count() * card()` entries).
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Row index of a parent configuration (one state per parent, in order).
    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parent_cards.len());
        parent_states
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &r)| acc * r + s)
    }

    /// Inverse of [`Cpt::row_index`].
    pub fn parent_states(&self, mut row: usize) -> Vec<usize> {
        let mut states = vec![0; self.parent_cards.len()];
        for (k, &r) in self.parent_cards.iter().enumerate().rev() {
            states[k] = row % r;
            row /= r;
        }
        states
    }

    pub fn prob(&self, parent_states: &[usize], state: usize) -> f64 {
        self.table[self.row_index(parent_states) * self.card + state]
    }
}

use crate::model::{Cpt, Dag, ModelError, VariableCatalog};

use super::factor::Factor;
use super::InferenceError;

/// A fully parameterized discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct BayesNet {
    catalog: VariableCatalog,
    dag: Dag,
    /// Indexed by node.
    cpts: Vec<Cpt>,
    factors: Vec<Factor>,
}

impl BayesNet {
    /// `dag` must list the catalog's variables in catalog order; `cpts` may
    /// come in any order but must cover every node exactly once.
    pub fn new(catalog: VariableCatalog, dag: Dag, cpts: Vec<Cpt>) -> Result<Self, InferenceError> {
        let invalid = |m: String| InferenceError::InvalidNetwork(m);
        if !dag.nodes().iter().map(String::as_str).eq(catalog.names()) {
            return Err(invalid("DAG nodes do not match the catalog order".into()));
        }
        let cards = catalog.cardinalities();
        let mut slots: Vec<Option<Cpt>> = vec![None; dag.len()];
        for cpt in cpts {
            let i = dag
                .index_of(cpt.node())
                .map_err(|_| invalid(format!("CPT for unknown node `{}`", cpt.node())))?;
            if slots[i].is_some() {
                return Err(invalid(format!("two CPTs for `{}`", cpt.node())));
            }
            let expected: Vec<&str> = dag.parents_of(i).iter().map(|&p| dag.name(p)).collect();
            if !cpt.parents().iter().map(String::as_str).eq(expected.iter().copied()) {
                return Err(invalid(format!(
                    "CPT parents of `{}` are {:?}, DAG parents are {:?}",
                    cpt.node(),
                    cpt.parents(),
                    expected
                )));
            }
            let parent_cards: Vec<usize> = dag.parents_of(i).iter().map(|&p| cards[p]).collect();
            if cpt.card() != cards[i] || cpt.parent_cards() != parent_cards.as_slice() {
                return Err(invalid(format!(
                    "CPT for `{}` disagrees with catalog bin counts",
                    cpt.node()
                )));
            }
            slots[i] = Some(cpt);
        }
        let cpts: Vec<Cpt> = slots
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| invalid(format!("no CPT for `{}`", dag.name(i)))))
            .collect::<Result<_, _>>()?;
        let factors = cpts
            .iter()
            .enumerate()
            .map(|(i, c)| Factor::from_cpt(i, dag.parents_of(i), c))
            .collect();
        Ok(BayesNet {
            catalog,
            dag,
            cpts,
            factors,
        })
    }

    pub fn catalog(&self) -> &VariableCatalog {
        &self.catalog
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    /// CPTs in node order.
    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, name: &str) -> Result<&Cpt, InferenceError> {
        let i = self.index_of(name)?;
        Ok(&self.cpts[i])
    }

    pub fn len(&self) -> usize {
        self.dag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dag.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, InferenceError> {
        self.catalog
            .index_of(name)
            .map_err(|_| InferenceError::UnknownVariable(name.to_string()))
    }

    pub(crate) fn factor(&self, i: usize) -> &Factor {
        &self.factors[i]
    }

    pub(crate) fn cards(&self) -> Vec<usize> {
        self.catalog.cardinalities()
    }
}

impl From<ModelError> for InferenceError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownVariable(v) => InferenceError::UnknownVariable(v),
            other => InferenceError::Model(other),
        }
    }
}

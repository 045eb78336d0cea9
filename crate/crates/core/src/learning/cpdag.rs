use std::collections::BTreeSet;

use crate::model::Dag;

/// Markov-equivalence signature of a DAG: its skeleton and v-structures.
/// Two DAGs are equivalent exactly when these agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    /// Unordered adjacencies, each pair stored name-sorted.
    pub skeleton: BTreeSet<(String, String)>,
    /// `(a, collider, b)` with `a < b`, `a -> collider <- b`, `a` and `b`
    /// not adjacent.
    pub v_structures: BTreeSet<(String, String, String)>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl EquivalenceClass {
    pub fn of(dag: &Dag) -> Self {
        let skeleton: BTreeSet<(String, String)> =
            dag.edges().iter().map(|(p, c)| ordered(p, c)).collect();
        let mut v_structures = BTreeSet::new();
        for c in 0..dag.len() {
            let ps = dag.parents_of(c);
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !dag.has_edge_idx(a, b) && !dag.has_edge_idx(b, a) {
                        let (x, y) = ordered(dag.name(a), dag.name(b));
                        v_structures.insert((x, dag.name(c).to_string(), y));
                    }
                }
            }
        }
        EquivalenceClass {
            skeleton,
            v_structures,
        }
    }
}

pub fn markov_equivalent(a: &Dag, b: &Dag) -> bool {
    EquivalenceClass::of(a) == EquivalenceClass::of(b)
}

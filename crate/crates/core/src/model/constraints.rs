use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Dag, ModelError, VariableCatalog};

/// Expert knowledge restricting which edges the structure search may use.
///
/// Besides the explicit forbidden set, any edge from a higher tier to a
/// strictly lower tier is forbidden. Nodes without a tier are unconstrained
/// by tiering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeConstraints {
    forbidden: BTreeSet<(String, String)>,
    forced: BTreeSet<(String, String)>,
    tiers: BTreeMap<String, u32>,
}

/// On-disk JSON layout of a constraint file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    #[serde(default)]
    pub forbidden: Vec<(String, String)>,
    #[serde(default)]
    pub forced: Vec<(String, String)>,
    #[serde(default)]
    pub tiers: BTreeMap<String, u32>,
}

/// One way a DAG fails to honour the constraints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    ForbiddenPresent(String, String),
    ForcedAbsent(String, String),
    TierViolation {
        parent: String,
        child: String,
        parent_tier: u32,
        child_tier: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForbiddenPresent(p, c) => write!(f, "forbidden edge {p} -> {c} present"),
            Violation::ForcedAbsent(p, c) => write!(f, "forced edge {p} -> {c} absent"),
            Violation::TierViolation {
                parent,
                child,
                parent_tier,
                child_tier,
            } => write!(
                f,
                "edge {parent} -> {child} runs from tier {parent_tier} back to tier {child_tier}"
            ),
        }
    }
}

impl KnowledgeConstraints {
    pub fn new(
        forbidden: impl IntoIterator<Item = (String, String)>,
        forced: impl IntoIterator<Item = (String, String)>,
        tiers: BTreeMap<String, u32>,
    ) -> Result<Self, ModelError> {
        let kc = KnowledgeConstraints {
            forbidden: forbidden.into_iter().collect(),
            forced: forced.into_iter().collect(),
            tiers,
        };
        if let Some((p, c)) = kc.forbidden.intersection(&kc.forced).next() {
            return Err(ModelError::ForcedAndForbidden(p.clone(), c.clone()));
        }
        for (p, c) in &kc.forced {
            if p == c {
                return Err(ModelError::InconsistentForced(format!("self-loop on {p}")));
            }
            if kc.tier_forbids(p, c) {
                return Err(ModelError::InconsistentForced(format!(
                    "{p} -> {c} runs from tier {} back to tier {}",
                    kc.tiers[p], kc.tiers[c]
                )));
            }
        }
        let names: BTreeSet<&String> = kc.forced.iter().flat_map(|(p, c)| [p, c]).collect();
        Dag::with_edges(names, kc.forced.iter().map(|(p, c)| (p, c))).map_err(|e| match e {
            ModelError::Cycle(p, c) => {
                ModelError::InconsistentForced(format!("cycle through {p} -> {c}"))
            }
            other => other,
        })?;
        Ok(kc)
    }

    /// Tier-only constraints.
    pub fn from_tiers(tiers: BTreeMap<String, u32>) -> Self {
        KnowledgeConstraints {
            tiers,
            ..Default::default()
        }
    }

    pub fn from_file(file: ConstraintFile) -> Result<Self, ModelError> {
        KnowledgeConstraints::new(file.forbidden, file.forced, file.tiers)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ConstraintFile =
            serde_json::from_str(text).map_err(|e| ModelError::ConstraintFormat(e.to_string()))?;
        KnowledgeConstraints::from_file(file)
    }

    pub fn to_file(&self) -> ConstraintFile {
        ConstraintFile {
            forbidden: self.forbidden.iter().cloned().collect(),
            forced: self.forced.iter().cloned().collect(),
            tiers: self.tiers.clone(),
        }
    }

    pub fn forbidden(&self) -> &BTreeSet<(String, String)> {
        &self.forbidden
    }

    pub fn forced(&self) -> &BTreeSet<(String, String)> {
        &self.forced
    }

    pub fn tiers(&self) -> &BTreeMap<String, u32> {
        &self.tiers
    }

    pub fn tier(&self, name: &str) -> Option<u32> {
        self.tiers.get(name).copied()
    }

    /// Copy with catalog tiers filled in wherever no explicit tier is set.
    pub fn with_catalog_tiers(&self, catalog: &VariableCatalog) -> Self {
        let mut next = self.clone();
        for v in catalog.variables() {
            next.tiers.entry(v.name.clone()).or_insert(v.tier);
        }
        next
    }

    fn tier_forbids(&self, parent: &str, child: &str) -> bool {
        matches!(
            (self.tiers.get(parent), self.tiers.get(child)),
            (Some(tp), Some(tc)) if tp > tc
        )
    }

    /// Whether an edge may appear in a compliant DAG.
    pub fn allows(&self, parent: &str, child: &str) -> bool {
        !self.tier_forbids(parent, child)
            && !self
                .forbidden
                .contains(&(parent.to_string(), child.to_string()))
    }

    pub fn is_forced(&self, parent: &str, child: &str) -> bool {
        self.forced.contains(&(parent.to_string(), child.to_string()))
    }

    /// Every name mentioned anywhere in the constraints.
    pub fn names(&self) -> BTreeSet<&str> {
        self.forbidden
            .iter()
            .chain(&self.forced)
            .flat_map(|(p, c)| [p.as_str(), c.as_str()])
            .chain(self.tiers.keys().map(String::as_str))
            .collect()
    }

    /// Every violation of these constraints in `dag`; empty iff compliant.
    ///
    /// Fails with `UnknownVariable` when a constraint names a node that is
    /// not in the graph.
    pub fn check(&self, dag: &Dag) -> Result<Vec<Violation>, ModelError> {
        for name in self.names() {
            dag.index_of(name)?;
        }
        let mut out = Vec::new();
        for (p, c) in &self.forbidden {
            if dag.has_edge(p, c) {
                out.push(Violation::ForbiddenPresent(p.clone(), c.clone()));
            }
        }
        for (p, c) in &self.forced {
            if !dag.has_edge(p, c) {
                out.push(Violation::ForcedAbsent(p.clone(), c.clone()));
            }
        }
        for (p, c) in dag.edges() {
            if let (Some(&tp), Some(&tc)) = (self.tiers.get(&p), self.tiers.get(&c)) {
                if tp > tc {
                    out.push(Violation::TierViolation {
                        parent: p,
                        child: c,
                        parent_tier: tp,
                        child_tier: tc,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Index-level view for a fixed node ordering.
    pub(crate) fn resolve(&self, dag: &Dag) -> Result<ConstraintMask, ModelError> {
        for name in self.names() {
            dag.index_of(name)?;
        }
        let n = dag.len();
        let mut allowed = vec![true; n * n];
        let mut forced = vec![false; n * n];
        for p in 0..n {
            for c in 0..n {
                allowed[p * n + c] = p != c && self.allows(dag.name(p), dag.name(c));
            }
        }
        for (p, c) in &self.forced {
            let (pi, ci) = (dag.index_of(p)?, dag.index_of(c)?);
            forced[pi * n + ci] = true;
        }
        Ok(ConstraintMask { n, allowed, forced })
    }
}

/// Dense allowed/forced matrices over node indices.
#[derive(Debug, Clone)]
pub(crate) struct ConstraintMask {
    n: usize,
    allowed: Vec<bool>,
    forced: Vec<bool>,
}

impl ConstraintMask {
    pub(crate) fn allowed(&self, p: usize, c: usize) -> bool {
        self.allowed[p * self.n + c]
    }

    pub(crate) fn forced(&self, p: usize, c: usize) -> bool {
        self.forced[p * self.n + c]
    }

    pub(crate) fn forced_edges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n * n)
            .filter(|&k| self.forced[k])
            .map(|k| (k / n, k % n))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn forbidden_edge_present() {
        let dag = Dag::with_edges(["A", "B"], [("A", "B")]).unwrap();
        let kc = KnowledgeConstraints::new([pair("A", "B")], [], BTreeMap::new()).unwrap();
        assert_eq!(
            kc.check(&dag).unwrap(),
            vec![Violation::ForbiddenPresent("A".into(), "B".into())]
        );
    }

    #[test]
    fn forced_edge_absent() {
        let dag = Dag::new(["A", "B"]).unwrap();
        let kc = KnowledgeConstraints::new([], [pair("A", "B")], BTreeMap::new()).unwrap();
        assert_eq!(kc.check(&dag).unwrap().len(), 1);
    }

    #[test]
    fn future_to_past_edge() {
        let dag = Dag::with_edges(["RF_Sep", "GDD_May"], [("RF_Sep", "GDD_May")]).unwrap();
        let tiers = BTreeMap::from([("RF_Sep".to_string(), 6), ("GDD_May".to_string(), 2)]);
        let kc = KnowledgeConstraints::from_tiers(tiers);
        let v = kc.check(&dag).unwrap();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::TierViolation { parent_tier: 6, child_tier: 2, .. }));
    }

    #[test]
    fn unknown_names_rejected() {
        let dag = Dag::new(["A"]).unwrap();
        let kc = KnowledgeConstraints::new([pair("A", "Q")], [], BTreeMap::new()).unwrap();
        assert!(matches!(kc.check(&dag), Err(ModelError::UnknownVariable(_))));
    }

    #[test]
    fn forced_and_forbidden_conflict() {
        let r = KnowledgeConstraints::new([pair("A", "B")], [pair("A", "B")], BTreeMap::new());
        assert!(matches!(r, Err(ModelError::ForcedAndForbidden(..))));
    }

    #[test]
    fn forced_must_respect_tiers_and_acyclicity() {
        let tiers = BTreeMap::from([("A".to_string(), 2), ("B".to_string(), 1)]);
        let r = KnowledgeConstraints::new([], [pair("A", "B")], tiers);
        assert!(matches!(r, Err(ModelError::InconsistentForced(_))));
        let r = KnowledgeConstraints::new(
            [],
            [pair("A", "B"), pair("B", "C"), pair("C", "A")],
            BTreeMap::new(),
        );
        assert!(matches!(r, Err(ModelError::InconsistentForced(_))));
    }

    #[test]
    fn json_layout() {
        let text = r#"{"forbidden": [["A","B"]], "forced": [["B","C"]], "tiers": {"A": 0, "C": 2}}"#;
        let kc = KnowledgeConstraints::from_json(text).unwrap();
        assert!(!kc.allows("A", "B"));
        assert!(kc.is_forced("B", "C"));
        assert!(!kc.allows("C", "A"));
        assert!(kc.allows("A", "C"));
        let back = serde_json::to_string(&kc.to_file()).unwrap();
        assert_eq!(KnowledgeConstraints::from_json(&back).unwrap(), kc);
        assert!(KnowledgeConstraints::from_json(r#"{"forbid": []}"#).is_err());
    }
}

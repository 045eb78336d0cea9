use std::collections::BTreeMap;

use serde::Serialize;

use super::{ModelError, VariableCatalog};

/// Observed bin assignments, validated against a catalog.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EvidenceSet {
    assignments: BTreeMap<String, usize>,
}

impl EvidenceSet {
    pub fn empty() -> Self {
        EvidenceSet::default()
    }

    /// Evidence that may include the target (used for training-time queries).
    pub fn new(
        catalog: &VariableCatalog,
        assignments: impl IntoIterator<Item = (String, usize)>,
    ) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (name, bin) in assignments {
            let spec = catalog.by_name(&name)?;
            let bins = spec.bins.bin_count();
            if bin >= bins {
                return Err(ModelError::BinOutOfRange {
                    variable: name,
                    bin,
                    bins,
                });
            }
            map.insert(name, bin);
        }
        Ok(EvidenceSet { assignments: map })
    }

    /// Evidence for a forecast: the target may not be observed.
    pub fn for_forecast(
        catalog: &VariableCatalog,
        assignments: impl IntoIterator<Item = (String, usize)>,
    ) -> Result<Self, ModelError> {
        let ev = EvidenceSet::new(catalog, assignments)?;
        let target = &catalog.target().name;
        if ev.assignments.contains_key(target) {
            return Err(ModelError::TargetAsEvidence(target.clone()));
        }
        Ok(ev)
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.assignments.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.assignments.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignments.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn assignments(&self) -> &BTreeMap<String, usize> {
        &self.assignments
    }

    /// Copy with one more assignment. The caller is responsible for having
    /// checked `bin` against the catalog.
    pub fn with(&self, name: impl Into<String>, bin: usize) -> Self {
        let mut next = self.clone();
        next.assignments.insert(name.into(), bin);
        next
    }

    /// True if every assignment here also appears, identically, in `other`.
    pub fn is_subset_of(&self, other: &EvidenceSet) -> bool {
        self.assignments
            .iter()
            .all(|(k, v)| other.assignments.get(k) == Some(v))
    }

    /// Dense per-node view in catalog order.
    pub fn to_dense(&self, catalog: &VariableCatalog) -> Result<Vec<Option<usize>>, ModelError> {
        let mut dense = vec![None; catalog.len()];
        for (name, &bin) in &self.assignments {
            dense[catalog.index_of(name)?] = Some(bin);
        }
        Ok(dense)
    }
}

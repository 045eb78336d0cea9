use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// How a variable enters the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    /// Read directly from the input panel.
    Raw,
    /// Computed from daily records (monthly GDD, rainfall totals, ...).
    Derived,
    /// The forecast target (yield).
    Target,
}

/// Cut points partitioning the real line into `edges.len() + 1` bins.
///
/// Bin `i` is the half-open interval `[edges[i-1], edges[i])`, with the first
/// bin open to `-inf` and the last open to `+inf`. Values outside the range
/// seen in training therefore still fall into a bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinScheme {
    edges: Vec<f64>,
    labels: Vec<String>,
    bin_means: Option<Vec<f64>>,
}

impl BinScheme {
    /// Scheme whose outer bins are labelled `below` and `above`.
    pub fn new(edges: Vec<f64>) -> Result<Self, ModelError> {
        check_edges(&edges)?;
        let labels = derive_labels(&edges, None);
        Ok(BinScheme {
            edges,
            labels,
            bin_means: None,
        })
    }

    /// Scheme for a quantity that cannot be negative; the first bin is
    /// labelled from `0` (e.g. `0–131` for yield).
    pub fn non_negative(edges: Vec<f64>) -> Result<Self, ModelError> {
        check_edges(&edges)?;
        let floor = match edges.first() {
            Some(&e) if e > 0.0 => Some(0.0),
            _ => None,
        };
        let labels = derive_labels(&edges, floor);
        Ok(BinScheme {
            edges,
            labels,
            bin_means: None,
        })
    }

    /// Rebuild a scheme from serialized parts, re-checking every invariant.
    pub fn from_parts(
        edges: Vec<f64>,
        labels: Vec<String>,
        bin_means: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        check_edges(&edges)?;
        if labels.len() != edges.len() + 1 {
            return Err(ModelError::InvalidBinScheme(format!(
                "{} labels for {} bins",
                labels.len(),
                edges.len() + 1
            )));
        }
        let scheme = BinScheme {
            edges,
            labels,
            bin_means: None,
        };
        match bin_means {
            Some(means) => scheme.with_bin_means(means),
            None => Ok(scheme),
        }
    }

    /// Attach per-bin means; each must lie inside its own bin.
    pub fn with_bin_means(mut self, means: Vec<f64>) -> Result<Self, ModelError> {
        if means.len() != self.bin_count() {
            return Err(ModelError::InvalidBinScheme(format!(
                "{} bin means for {} bins",
                means.len(),
                self.bin_count()
            )));
        }
        for (i, &m) in means.iter().enumerate() {
            if !m.is_finite() || self.bin_of(m) != i {
                return Err(ModelError::InvalidBinScheme(format!(
                    "mean {m} does not lie in bin {i} ({})",
                    self.labels[i]
                )));
            }
        }
        self.bin_means = Some(means);
        Ok(self)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bin_means(&self) -> Option<&[f64]> {
        self.bin_means.as_deref()
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() + 1
    }

    /// Index of the bin containing `value`. NaN is not a valid value and
    /// lands in the first bin; callers filter missing cells beforehand.
    pub fn bin_of(&self, value: f64) -> usize {
        self.edges.partition_point(|&e| e <= value)
    }

    /// Lower and upper bound of bin `i` (infinite for the outer bins).
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.edges[i - 1]
        };
        let hi = self.edges.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }
}

fn check_edges(edges: &[f64]) -> Result<(), ModelError> {
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(ModelError::InvalidBinScheme("non-finite edge".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModelError::InvalidBinScheme(
            "edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Compact rendering for labels: at most four decimals, trailing zeros trimmed.
pub(crate) fn format_cut(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn derive_labels(edges: &[f64], floor: Option<f64>) -> Vec<String> {
    if edges.is_empty() {
        return vec!["all".to_string()];
    }
    let mut labels = Vec::with_capacity(edges.len() + 1);
    let first = match floor {
        Some(f) => format_cut(f),
        None => "below".to_string(),
    };
    labels.push(format!("{first}–{}", format_cut(edges[0])));
    for w in edges.windows(2) {
        labels.push(format!("{}–{}", format_cut(w[0]), format_cut(w[1])));
    }
    labels.push(format!("{}–above", format_cut(edges[edges.len() - 1])));
    labels
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    pub tier: u32,
    pub bins: BinScheme,
}

/// Ordered set of model variables. Variable order is significant: it fixes
/// node indices, CPT parent order and serialization order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableCatalog {
    variables: Vec<VariableSpec>,
    index: HashMap<String, usize>,
    target: usize,
}

impl VariableCatalog {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
        }
        let targets: Vec<usize> = variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VariableKind::Target)
            .map(|(i, _)| i)
            .collect();
        if targets.len() != 1 {
            return Err(ModelError::TargetCount(targets.len()));
        }
        Ok(VariableCatalog {
            target: targets[0],
            variables,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn get(&self, i: usize) -> &VariableSpec {
        &self.variables[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ModelError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn by_name(&self, name: &str) -> Result<&VariableSpec, ModelError> {
        Ok(&self.variables[self.index_of(name)?])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &VariableSpec {
        &self.variables[self.target]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.bins.bin_count()).collect()
    }

    /// Copy of the catalog with one variable's bin scheme replaced.
    pub fn with_bins(&self, name: &str, bins: BinScheme) -> Result<Self, ModelError> {
        let i = self.index_of(name)?;
        let mut variables = self.variables.clone();
        variables[i].bins = bins;
        VariableCatalog::new(variables)
    }
}

//! Versioned JSON form of a learned model.
//!
//! Layout and ordering, all deterministic:
//! - `variables` in catalog order, each with its bin edges, labels and
//!   optional bin means;
//! - `edges` sorted by `(from, to)` name, each with its strength of influence;
//! - `cpts` in catalog order; `parents` in node order and `rows` in mixed
//!   radix over the parents, first parent most significant.
//!
//! Floats are written in shortest round-trip form.

use serde::{Deserialize, Serialize};

use crate::inference::{strength_of_influence, BayesNet};
use crate::model::{BinScheme, Cpt, Dag, VariableCatalog, VariableKind, VariableSpec};
use crate::pipeline::DiscretizedDataset;

use super::LearningError;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelVariable {
    pub name: String,
    pub kind: VariableKind,
    pub tier: u32,
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
    pub bin_means: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEdge {
    pub from: String,
    pub to: String,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCpt {
    pub node: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub variables: Vec<ModelVariable>,
    pub edges: Vec<ModelEdge>,
    pub cpts: Vec<ModelCpt>,
}

/// A network together with the strength of each of its edges.
#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub net: BayesNet,
    /// `(parent, child, strength)`, sorted by names.
    pub strengths: Vec<(String, String, f64)>,
}

impl LearnedModel {
    /// Compute edge strengths, weighting by `data` when given.
    pub fn new(net: BayesNet, data: Option<&DiscretizedDataset>) -> Result<Self, LearningError> {
        let strengths = net
            .dag()
            .edges()
            .into_iter()
            .map(|(p, c)| {
                let s = strength_of_influence(&net, &p, &c, data)?;
                Ok((p, c, s))
            })
            .collect::<Result<_, LearningError>>()?;
        Ok(LearnedModel { net, strengths })
    }

    pub fn strength(&self, parent: &str, child: &str) -> Option<f64> {
        self.strengths
            .iter()
            .find(|(p, c, _)| p == parent && c == child)
            .map(|t| t.2)
    }

    pub fn to_file(&self) -> ModelFile {
        let variables = self
            .net
            .catalog()
            .variables()
            .iter()
            .map(|v| ModelVariable {
                name: v.name.clone(),
                kind: v.kind,
                tier: v.tier,
                edges: v.bins.edges().to_vec(),
                labels: v.bins.labels().to_vec(),
                bin_means: v.bins.bin_means().map(<[f64]>::to_vec),
            })
            .collect();
        let edges = self
            .strengths
            .iter()
            .map(|(p, c, s)| ModelEdge {
                from: p.clone(),
                to: c.clone(),
                strength: *s,
            })
            .collect();
        let cpts = self
            .net
            .cpts()
            .iter()
            .map(|c| ModelCpt {
                node: c.node().to_string(),
                parents: c.parents().to_vec(),
                rows: c.rows().map(<[f64]>::to_vec).collect(),
            })
            .collect();
        ModelFile {
            version: MODEL_VERSION,
            variables,
            edges,
            cpts,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("model is serializable");
        s.push('\n');
        s
    }

    pub fn from_file(file: ModelFile) -> Result<Self, LearningError> {
        let bad = |m: String| LearningError::ModelFormat(m);
        if file.version != MODEL_VERSION {
            return Err(bad(format!("unsupported model version {}", file.version)));
        }
        let specs = file
            .variables
            .into_iter()
            .map(|v| {
                let bins = BinScheme::from_parts(v.edges, v.labels, v.bin_means)?;
                Ok(VariableSpec {
                    name: v.name,
                    kind: v.kind,
                    tier: v.tier,
                    bins,
                })
            })
            .collect::<Result<Vec<_>, LearningError>>()?;
        let catalog = VariableCatalog::new(specs)?;
        let dag = Dag::with_edges(
            catalog.names().map(String::from).collect::<Vec<_>>(),
            file.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())),
        )?;
        let cards = catalog.cardinalities();
        let cpts = file
            .cpts
            .into_iter()
            .map(|c| {
                let card = cards[catalog.index_of(&c.node)?];
                let parent_cards = c
                    .parents
                    .iter()
                    .map(|p| catalog.index_of(p).map(|i| cards[i]))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Cpt::new(c.node, c.parents, parent_cards, card, c.rows)?)
            })
            .collect::<Result<Vec<_>, LearningError>>()?;
        let net = BayesNet::new(catalog, dag, cpts)?;
        let mut strengths: Vec<(String, String, f64)> = file
            .edges
            .into_iter()
            .map(|e| {
                if !(0.0..=1.0).contains(&e.strength) {
                    return Err(bad(format!("strength {} of {} -> {} outside [0, 1]", e.strength, e.from, e.to)));
                }
                Ok((e.from, e.to, e.strength))
            })
            .collect::<Result<_, _>>()?;
        strengths.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        Ok(LearnedModel { net, strengths })
    }

    pub fn from_json(text: &str) -> Result<Self, LearningError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| LearningError::ModelFormat(e.to_string()))?;
        LearnedModel::from_file(file)
    }
}

use rand::Rng;

use crate::inference::BayesNet;
use crate::model::{BinScheme, Cpt, Dag, VariableCatalog, VariableKind, VariableSpec};
use crate::pipeline::{DiscreteRow, DiscretizedDataset};

/// Shape of a random network. Nodes are named `V0..`, the last one is the
/// target, and edges only run from lower to higher index.
#[derive(Debug, Clone)]
pub struct RandomNetConfig {
    pub nodes: usize,
    pub min_card: usize,
    pub max_card: usize,
    pub max_parents: usize,
    pub edge_prob: f64,
    /// Chance that a CPT entry is forced to zero before renormalizing.
    pub zero_prob: f64,
}

impl Default for RandomNetConfig {
    fn default() -> Self {
        RandomNetConfig {
            nodes: 6,
            min_card: 2,
            max_card: 4,
            max_parents: 3,
            edge_prob: 0.4,
            zero_prob: 0.0,
        }
    }
}

/// Bin scheme with `card` bins cut at `1, 2, ..`; bin means are `i + 0.5`.
pub fn unit_scheme(card: usize) -> BinScheme {
    let edges: Vec<f64> = (1..card).map(|e| e as f64).collect();
    let means: Vec<f64> = (0..card).map(|i| i as f64 + 0.5).collect();
    BinScheme::new(edges)
        .and_then(|s| s.with_bin_means(means))
        .expect("unit scheme is valid")
}

/// Catalog of `cards.len()` variables `V0..` with the last as target and
/// tiers equal to the index.
pub fn unit_catalog(cards: &[usize]) -> VariableCatalog {
    let last = cards.len() - 1;
    let vars = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| VariableSpec {
            name: format!("V{i}"),
            kind: if i == last {
                VariableKind::Target
            } else {
                VariableKind::Raw
            },
            tier: i as u32,
            bins: unit_scheme(c),
        })
        .collect();
    VariableCatalog::new(vars).expect("generated names are unique")
}

/// A random distribution over `k` states.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, k: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let mut row: Vec<f64> = (0..k)
            .map(|_| {
                if zero_prob > 0.0 && rng.random::<f64>() < zero_prob {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let z: f64 = row.iter().sum();
        if z > 0.0 {
            row.iter_mut().for_each(|p| *p /= z);
            return row;
        }
    }
}

/// Random CPTs for `dag` over `catalog`.
pub fn random_cpts<R: Rng + ?Sized>(
    rng: &mut R,
    catalog: &VariableCatalog,
    dag: &Dag,
    zero_prob: f64,
) -> Vec<Cpt> {
    let cards = catalog.cardinalities();
    (0..dag.len())
        .map(|i| {
            let parents = dag.parents_of(i);
            let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
            let rows = (0..parent_cards.iter().product::<usize>())
                .map(|_| random_distribution(rng, cards[i], zero_prob))
                .collect();
            Cpt::new(
                dag.name(i),
                parents.iter().map(|&p| dag.name(p).to_string()).collect(),
                parent_cards,
                cards[i],
                rows,
            )
            .expect("random rows are normalized")
        })
        .collect()
}

pub fn random_network<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomNetConfig) -> BayesNet {
    let cards: Vec<usize> = (0..cfg.nodes)
        .map(|_| rng.random_range(cfg.min_card..=cfg.max_card))
        .collect();
    let catalog = unit_catalog(&cards);
    let mut edges = Vec::new();
    for child in 1..cfg.nodes {
        let mut count = 0;
        for parent in 0..child {
            if count < cfg.max_parents && rng.random::<f64>() < cfg.edge_prob {
                edges.push((format!("V{parent}"), format!("V{child}")));
                count += 1;
            }
        }
    }
    let dag = Dag::with_edges(catalog.names().map(String::from).collect::<Vec<_>>(), edges)
        .expect("forward edges are acyclic");
    let cpts = random_cpts(rng, &catalog, &dag, cfg.zero_prob);
    BayesNet::new(catalog, dag, cpts).expect("generated network is consistent")
}

fn draw<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding residue: last state with positive mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Ancestral sampling; each sample lists one bin per node in node order.
pub fn forward_sample<R: Rng + ?Sized>(rng: &mut R, net: &BayesNet, n: usize) -> Vec<Vec<usize>> {
    let order = net.dag().topological_order();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = vec![0usize; net.len()];
        for &i in &order {
            let states: Vec<usize> = net.dag().parents_of(i).iter().map(|&p| x[p]).collect();
            let cpt = &net.cpts()[i];
            x[i] = draw(rng, cpt.row(cpt.row_index(&states)));
        }
        out.push(x);
    }
    out
}

/// Wrap samples as a dataset, hiding each cell with probability `missing`.
pub fn samples_to_dataset<R: Rng + ?Sized>(
    rng: &mut R,
    catalog: &VariableCatalog,
    samples: &[Vec<usize>],
    missing: f64,
) -> DiscretizedDataset {
    let rows = samples
        .iter()
        .enumerate()
        .map(|(k, s)| DiscreteRow {
            county_fips: format!("S{:05}", k / 100),
            year: 2000 + (k % 100) as i32,
            bins: s
                .iter()
                .map(|&b| {
                    if missing > 0.0 && rng.random::<f64>() < missing {
                        None
                    } else {
                        Some(b)
                    }
                })
                .collect(),
        })
        .collect();
    DiscretizedDataset::new(catalog.clone(), rows).expect("samples match the catalog")
}

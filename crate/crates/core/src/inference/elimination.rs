//! Variable elimination.

use std::collections::BTreeSet;

use super::factor::Factor;
use super::network::BayesNet;
use super::InferenceError;

/// Normalization mass below which evidence counts as impossible.
pub const IMPOSSIBLE_MASS: f64 = 1e-12;

/// Unnormalized `P(query, evidence)` as a factor over `query` (ascending).
///
/// `evidence[i]` is the observed bin of node `i`, if any. Only ancestors of
/// the query and evidence nodes take part. Without an explicit `order` the
/// hidden variables are eliminated greedily by min-fill.
pub fn unnormalized(
    net: &BayesNet,
    evidence: &[Option<usize>],
    query: &[usize],
    order: Option<&[usize]>,
) -> Result<Factor, InferenceError> {
    let n = net.len();
    if evidence.len() != n {
        return Err(InferenceError::InvalidNetwork(format!(
            "evidence vector has {} entries for {n} nodes",
            evidence.len()
        )));
    }
    let cards = net.cards();
    for (i, e) in evidence.iter().enumerate() {
        if let Some(b) = *e {
            if b >= cards[i] {
                return Err(InferenceError::Model(crate::model::ModelError::BinOutOfRange {
                    variable: net.dag().name(i).to_string(),
                    bin: b,
                    bins: cards[i],
                }));
            }
        }
    }
    for &q in query {
        if q >= n {
            return Err(InferenceError::UnknownVariable(format!("#{q}")));
        }
        if evidence[q].is_some() {
            return Err(InferenceError::QueryObserved(net.dag().name(q).to_string()));
        }
    }

    let mut seeds: Vec<usize> = query.to_vec();
    seeds.extend((0..n).filter(|&i| evidence[i].is_some()));
    let relevant = net.dag().ancestral_set(&seeds);

    let mut factors: Vec<Factor> = Vec::new();
    for i in (0..n).filter(|&i| relevant[i]) {
        let mut f = net.factor(i).clone();
        for &v in f.vars().to_vec().iter() {
            if let Some(b) = evidence[v] {
                f = f.reduce(v, b);
            }
        }
        factors.push(f);
    }

    let query_set: BTreeSet<usize> = query.iter().copied().collect();
    let hidden: BTreeSet<usize> = (0..n)
        .filter(|&i| relevant[i] && evidence[i].is_none() && !query_set.contains(&i))
        .collect();

    let order: Vec<usize> = match order {
        Some(o) => {
            let chosen: Vec<usize> = o.iter().copied().filter(|v| hidden.contains(v)).collect();
            let unique: BTreeSet<usize> = chosen.iter().copied().collect();
            if unique.len() != chosen.len() || unique != hidden {
                return Err(InferenceError::InvalidOrder);
            }
            chosen
        }
        None => min_fill_order(&factors, &hidden, n),
    };

    for v in order {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        let product = touching
            .iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        factors.push(product.sum_out(v));
    }
    Ok(factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f)))
}

/// Greedy min-fill ordering over the interaction graph of `factors`, which
/// after evidence reduction is the moral graph of the relevant nodes.
/// Ties go to the lower node index.
pub fn min_fill_order(factors: &[Factor], hidden: &BTreeSet<usize>, n: usize) -> Vec<usize> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for f in factors {
        for &a in f.vars() {
            for &b in f.vars() {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut remaining = hidden.clone();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for &v in &remaining {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (k, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[k + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(_, f)| fill < f) {
                best = Some((v, fill));
            }
        }
        let (v, _) = best.expect("remaining is non-empty");
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        remaining.remove(&v);
        order.push(v);
    }
    order
}

/// Normalized `P(query | evidence)` over `query` (ascending node order).
pub fn joint_posterior(
    net: &BayesNet,
    evidence: &[Option<usize>],
    query: &[usize],
) -> Result<Factor, InferenceError> {
    let mut f = unnormalized(net, evidence, query, None)?;
    let mass = f.total();
    if mass < IMPOSSIBLE_MASS {
        return Err(InferenceError::ImpossibleEvidence { mass });
    }
    f.normalize();
    Ok(f)
}

/// `P(evidence)`; 1 for empty evidence.
pub fn evidence_probability(net: &BayesNet, evidence: &[Option<usize>]) -> Result<f64, InferenceError> {
    Ok(unnormalized(net, evidence, &[], None)?.total())
}

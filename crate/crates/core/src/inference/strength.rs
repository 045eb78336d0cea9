use crate::pipeline::DiscretizedDataset;

use super::network::BayesNet;
use super::InferenceError;

/// Half the L1 distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// How far the child's conditional distribution moves as `parent` changes.
///
/// For every configuration of the child's other parents, takes the largest
/// total-variation distance between rows that differ only in `parent`, then
/// averages those maxima weighted by how often each configuration occurs in
/// `data` (rows with any of those parents missing are skipped). Falls back to
/// uniform weights without data or when no row is usable.
pub fn strength_of_influence(
    net: &BayesNet,
    parent: &str,
    child: &str,
    data: Option<&DiscretizedDataset>,
) -> Result<f64, InferenceError> {
    let unknown = || InferenceError::UnknownEdge(parent.to_string(), child.to_string());
    let p = net.index_of(parent).map_err(|_| unknown())?;
    let c = net.index_of(child).map_err(|_| unknown())?;
    if !net.dag().has_edge_idx(p, c) {
        return Err(unknown());
    }
    let cpt = &net.cpts()[c];
    let parents = net.dag().parents_of(c);
    let k = parents.iter().position(|&x| x == p).expect("edge checked");
    let cards = cpt.parent_cards();

    // configurations of the other parents, in mixed radix
    let others: Vec<usize> = (0..parents.len()).filter(|&j| j != k).collect();
    let other_count: usize = others.iter().map(|&j| cards[j]).product();

    let mut weights = vec![0.0; other_count];
    if let Some(d) = data {
        let cols: Vec<usize> = others.iter().map(|&j| parents[j]).collect();
        for row in d.rows() {
            let mut idx = 0;
            let mut complete = true;
            for (&j, &col) in others.iter().zip(&cols) {
                match row.bins.get(col).copied().flatten() {
                    Some(b) => idx = idx * cards[j] + b,
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                weights[idx] += 1.0;
            }
        }
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let total: f64 = weights.iter().sum();

    let mut states = vec![0usize; parents.len()];
    let mut acc = 0.0;
    for (ci, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut rem = ci;
        for &j in others.iter().rev() {
            states[j] = rem % cards[j];
            rem /= cards[j];
        }
        let mut rows = Vec::with_capacity(cards[k]);
        for s in 0..cards[k] {
            states[k] = s;
            rows.push(cpt.row(cpt.row_index(&states)));
        }
        let mut max_tv: f64 = 0.0;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                max_tv = max_tv.max(total_variation(rows[a], rows[b]));
            }
        }
        acc += w * max_tv;
    }
    Ok((acc / total).clamp(0.0, 1.0))
}

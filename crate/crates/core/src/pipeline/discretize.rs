//! Hierarchical (agglomerative) discretization of continuous columns.
//!
//! A column is first cut into at most [`MICRO_BINS`] equal-frequency
//! micro-bins. Adjacent bins are then merged greedily. With a target the
//! merge that loses the least mutual information with the target goes first;
//! without one, the merge that adds the least within-bin squared error.
//! Merging is mandatory while more than `max_bins` bins remain, and continues
//! below that while the log-likelihood lost is smaller than the BIC parameter
//! penalty saved, `(ln N / 2) * Δparams`. Two bins is the floor.

use crate::model::BinScheme;

use super::PipelineError;

pub const MICRO_BINS: usize = 32;

#[derive(Debug, Clone)]
struct Run {
    lo: f64,
    hi: f64,
    count: usize,
    mean: f64,
    /// Sum of squared deviations from `mean`.
    m2: f64,
    targets: Vec<f64>,
}

impl Run {
    fn merged(&self, other: &Run) -> Run {
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let na = self.count as f64;
        let nb = other.count as f64;
        Run {
            lo: self.lo,
            hi: other.hi,
            count: self.count + other.count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
            targets: self
                .targets
                .iter()
                .zip(&other.targets)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

fn xlogx_ratio(n: f64, total: f64) -> f64 {
    if n > 0.0 {
        n * (n / total).ln()
    } else {
        0.0
    }
}

/// Conditional log-likelihood of the target within one bin.
fn target_loglik(run: &Run) -> f64 {
    let total = run.count as f64;
    run.targets.iter().map(|&n| xlogx_ratio(n, total)).sum()
}

/// Discretize `values` into at most `max_bins` bins.
///
/// `target`, when given, holds a class index aligned with each value and
/// drives supervised merging.
pub fn discretize_column(
    values: &[f64],
    target: Option<&[usize]>,
    max_bins: usize,
) -> Result<BinScheme, PipelineError> {
    if max_bins < 2 {
        return Err(PipelineError::InvalidArgument("max_bins must be at least 2".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PipelineError::InvalidArgument("values must be finite".into()));
    }
    if let Some(t) = target {
        if t.len() != values.len() {
            return Err(PipelineError::InvalidArgument(format!(
                "{} target labels for {} values",
                t.len(),
                values.len()
            )));
        }
    }
    let classes = target.map_or(0, |t| t.iter().max().map_or(0, |&m| m + 1));

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    // One run per distinct value.
    let mut runs: Vec<Run> = Vec::new();
    for &i in &order {
        let v = values[i];
        let need_new = runs.last().is_none_or(|r| r.hi != v);
        if need_new {
            runs.push(Run {
                lo: v,
                hi: v,
                count: 0,
                mean: v,
                m2: 0.0,
                targets: vec![0.0; classes],
            });
        }
        let r = runs.last_mut().expect("just pushed");
        r.count += 1;
        if let Some(t) = target {
            r.targets[t[i]] += 1.0;
        }
    }
    if runs.len() < 2 {
        return Err(PipelineError::DegenerateColumn);
    }

    let n = values.len();
    let micro = MICRO_BINS.min(runs.len());
    let mut bins: Vec<Run> = Vec::with_capacity(micro);
    let mut current: Option<Run> = None;
    let mut cumulative = 0usize;
    for (k, run) in runs.iter().enumerate() {
        cumulative += run.count;
        current = Some(match current.take() {
            Some(c) => c.merged(run),
            None => run.clone(),
        });
        let threshold = ((bins.len() + 1) * n) as f64 / micro as f64;
        if cumulative as f64 >= threshold - 1e-9 || k + 1 == runs.len() {
            bins.extend(current.take());
        }
    }

    let ln_n = (n as f64).ln();
    let penalty = match target {
        Some(_) => ln_n / 2.0 * (classes.saturating_sub(1)) as f64,
        None => ln_n / 2.0,
    };
    while bins.len() > 2 {
        let (best, cost) = cheapest_merge(&bins, target.is_some(), n);
        if bins.len() > max_bins || cost < penalty {
            let merged = bins[best].merged(&bins[best + 1]);
            bins.splice(best..best + 2, [merged]);
        } else {
            break;
        }
    }

    let edges: Vec<f64> = bins
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].hi, w[1].lo);
            let mid = a + (b - a) / 2.0;
            if mid > a && mid <= b {
                mid
            } else {
                b
            }
        })
        .collect();
    let min = bins[0].lo;
    let scheme = if min >= 0.0 {
        BinScheme::non_negative(edges)
    } else {
        BinScheme::new(edges)
    };
    Ok(scheme.expect("edges between sorted distinct values are strictly increasing"))
}

fn cheapest_merge(bins: &[Run], supervised: bool, n: usize) -> (usize, f64) {
    let total_sse: f64 = bins.iter().map(|b| b.m2).sum();
    let mut best = (0, f64::INFINITY);
    let mut best_rank = f64::INFINITY;
    for i in 0..bins.len() - 1 {
        let merged = bins[i].merged(&bins[i + 1]);
        let (rank, cost) = if supervised {
            let loss = target_loglik(&bins[i]) + target_loglik(&bins[i + 1]) - target_loglik(&merged);
            let loss = loss.max(0.0);
            (loss, loss)
        } else {
            let added = merged.m2 - bins[i].m2 - bins[i + 1].m2;
            let cost = if total_sse > 0.0 {
                n as f64 / 2.0 * ((total_sse + added) / total_sse).ln()
            } else {
                f64::INFINITY
            };
            (added, cost)
        };
        if rank < best_rank {
            best_rank = rank;
            best = (i, cost);
        }
    }
    best
}

/// Attach the arithmetic mean of the training values in each bin.
pub fn compute_bin_means(values: &[f64], scheme: &BinScheme) -> Result<BinScheme, PipelineError> {
    let k = scheme.bin_count();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for &v in values {
        let b = scheme.bin_of(v);
        sums[b] += v;
        counts[b] += 1;
    }
    let mut means = Vec::with_capacity(k);
    for b in 0..k {
        if counts[b] == 0 {
            return Err(PipelineError::EmptyBin {
                bin: b,
                label: scheme.labels()[b].clone(),
            });
        }
        means.push(sums[b] / counts[b] as f64);
    }
    scheme
        .clone()
        .with_bin_means(means)
        .map_err(|e| PipelineError::InvalidArgument(e.to_string()))
}

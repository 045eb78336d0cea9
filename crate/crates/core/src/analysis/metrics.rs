use serde::Serialize;

use super::AnalysisError;

/// Rows are true bins, columns predicted bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub bin_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `trace / total`; `None` when there are no pairs.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.trace() as f64 / total as f64)
    }
}

/// Tally `(true_bin, predicted_bin)` pairs over `k` bins labelled `0..k`.
pub fn confusion_matrix(pairs: &[(usize, usize)], k: usize) -> Result<ConfusionMatrix, AnalysisError> {
    let labels = (0..k).map(|i| i.to_string()).collect();
    confusion_matrix_labelled(pairs, labels)
}

pub fn confusion_matrix_labelled(
    pairs: &[(usize, usize)],
    bin_labels: Vec<String>,
) -> Result<ConfusionMatrix, AnalysisError> {
    let k = bin_labels.len();
    let mut counts = vec![vec![0u64; k]; k];
    for &(t, p) in pairs {
        for bin in [t, p] {
            if bin >= k {
                return Err(AnalysisError::BinOutOfRange { bin, bins: k });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { bin_labels, counts })
}

/// `100 · |predicted − actual| / actual`, rounded to two decimals.
pub fn county_error(actual: f64, predicted: f64) -> Result<f64, AnalysisError> {
    if actual.is_nan() || actual <= 0.0 {
        return Err(AnalysisError::NonPositiveActual(actual));
    }
    Ok(round2(100.0 * (predicted - actual).abs() / actual))
}

pub(crate) fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Number of errors at or below `threshold` percent.
pub fn accuracy_at_threshold(errors: &[f64], threshold: f64) -> usize {
    errors.iter().filter(|&&e| e <= threshold).count()
}

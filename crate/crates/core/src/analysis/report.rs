use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::inference::{expected_yield, BayesNet, InferenceError};
use crate::model::EvidenceSet;
use crate::pipeline::{format_cell, DiscretizedDataset, RawPanel};

use super::metrics::{accuracy_at_threshold, confusion_matrix_labelled, county_error, ConfusionMatrix};
use super::AnalysisError;

/// One held-out county-year to forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCase {
    pub county_fips: String,
    pub year: i32,
    pub evidence: EvidenceSet,
    pub actual_bin: usize,
    pub actual_yield: Option<f64>,
}

/// Cases from every row with an observed target; the evidence is every
/// other observed cell. Continuous actual yields are looked up in
/// `actuals` (column named after the target) when given.
pub fn cases_from_dataset(data: &DiscretizedDataset, actuals: Option<&RawPanel>) -> Vec<EvalCase> {
    let catalog = data.catalog();
    let t = catalog.target_index();
    let lookup: HashMap<(String, i32), f64> = actuals
        .and_then(|panel| {
            let col = panel.column_index(&catalog.target().name).ok()?;
            Some(
                panel
                    .rows()
                    .iter()
                    .filter_map(|r| r.values[col].map(|v| ((r.county_fips.clone(), r.year), v)))
                    .collect(),
            )
        })
        .unwrap_or_default();
    data.rows()
        .iter()
        .filter_map(|row| {
            let actual_bin = row.bins[t]?;
            let pairs = row
                .bins
                .iter()
                .enumerate()
                .filter(|&(i, b)| i != t && b.is_some())
                .map(|(i, b)| (catalog.get(i).name.clone(), b.expect("filtered")));
            let evidence = EvidenceSet::for_forecast(catalog, pairs).expect("dataset bins are in range");
            Some(EvalCase {
                county_fips: row.county_fips.clone(),
                year: row.year,
                evidence,
                actual_bin,
                actual_yield: lookup.get(&(row.county_fips.clone(), row.year)).copied(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountyResult {
    pub county_fips: String,
    pub year: i32,
    pub actual_bin: usize,
    pub predicted_bin: usize,
    pub actual: Option<f64>,
    pub predicted: f64,
    pub percent_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub count: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCase {
    pub county_fips: String,
    pub year: i32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: Option<f64>,
    pub counties: Vec<CountyResult>,
    pub thresholds: Vec<ThresholdCount>,
    pub skipped: Vec<SkippedCase>,
}

/// Forecast every case and tabulate. The predicted bin is the posterior
/// argmax (ties to the lower bin). Cases whose evidence is impossible
/// under the model are listed in `skipped`.
pub fn evaluate(net: &BayesNet, cases: &[EvalCase], thresholds: &[f64]) -> Result<EvaluationReport, AnalysisError> {
    let mut pairs = Vec::with_capacity(cases.len());
    let mut counties = Vec::with_capacity(cases.len());
    let mut skipped = Vec::new();
    for case in cases {
        let f = match expected_yield(net, &case.evidence) {
            Ok(f) => f,
            Err(e @ InferenceError::ImpossibleEvidence { .. }) => {
                skipped.push(SkippedCase {
                    county_fips: case.county_fips.clone(),
                    year: case.year,
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(AnalysisError::Inference(e)),
        };
        let predicted_bin = f.posterior.argmax();
        pairs.push((case.actual_bin, predicted_bin));
        let percent_diff = match case.actual_yield {
            Some(a) => Some(county_error(a, f.expected_yield)?),
            None => None,
        };
        counties.push(CountyResult {
            county_fips: case.county_fips.clone(),
            year: case.year,
            actual_bin: case.actual_bin,
            predicted_bin,
            actual: case.actual_yield,
            predicted: f.expected_yield,
            percent_diff,
        });
    }
    let confusion = confusion_matrix_labelled(&pairs, net.catalog().target().bins.labels().to_vec())?;
    let errors: Vec<f64> = counties.iter().filter_map(|c| c.percent_diff).collect();
    let thresholds = thresholds
        .iter()
        .map(|&threshold| ThresholdCount {
            threshold,
            count: accuracy_at_threshold(&errors, threshold),
            total: errors.len(),
        })
        .collect();
    Ok(EvaluationReport {
        accuracy: confusion.accuracy(),
        confusion,
        counties,
        thresholds,
        skipped,
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Per-county table: `county_fips,year,actual,predicted,percent_diff,actual_bin,predicted_bin`.
    pub fn write_county_csv<W: Write>(&self, writer: W) -> Result<(), AnalysisError> {
        let io = |e: csv::Error| AnalysisError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "county_fips",
            "year",
            "actual",
            "predicted",
            "percent_diff",
            "actual_bin",
            "predicted_bin",
        ])
        .map_err(io)?;
        for c in &self.counties {
            w.write_record([
                c.county_fips.clone(),
                c.year.to_string(),
                format_cell(c.actual),
                c.predicted.to_string(),
                c.percent_diff.map_or_else(|| "NA".to_string(), |d| format!("{d:.2}")),
                c.actual_bin.to_string(),
                c.predicted_bin.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| AnalysisError::Io(e.to_string()))
    }
}

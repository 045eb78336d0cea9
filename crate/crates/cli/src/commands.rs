//! The workflow steps behind each subcommand, on in-memory values.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tracing::{info, warn};

use hb_core::analysis::{cases_from_dataset, evaluate, EvaluationReport};
use hb_core::inference::{expected_yield, BayesNet, YieldForecast};
use hb_core::learning::{em_fit, fit_parameters, learn_structure, LearnedModel, SearchConfig};
use hb_core::model::{EvidenceSet, KnowledgeConstraints, VariableCatalog};
use hb_core::pipeline::{
    build_catalog, ingest, CatalogPlan, DailyTable, DiscretizedDataset, IngestConfig, RawPanel, Recipe,
    DEFAULT_YIELD_EDGES,
};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct LearnOptions {
    pub target: String,
    pub max_bins: usize,
    pub target_edges: Option<Vec<f64>>,
    /// Columns produced by a recipe; recorded as derived in the model.
    pub derived: BTreeSet<String>,
    pub search: SearchConfig,
    pub alpha: f64,
    /// EM replaces available-case fitting when the fraction of missing
    /// cells exceeds this.
    pub em_threshold: f64,
    pub em_tol: f64,
    pub em_max_iters: usize,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            target: "Yield".into(),
            max_bins: 4,
            target_edges: Some(DEFAULT_YIELD_EDGES.to_vec()),
            derived: BTreeSet::new(),
            search: SearchConfig::default(),
            alpha: 1.0,
            em_threshold: 0.05,
            em_tol: 1e-6,
            em_max_iters: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub model: LearnedModel,
    pub data: DiscretizedDataset,
    pub bic: f64,
    pub missing_fraction: f64,
    /// `(iterations, converged)` when EM was used.
    pub em: Option<(usize, bool)>,
}

/// Aggregate a daily weather table into a county-year panel.
pub fn run_ingest(
    daily: &DailyTable,
    recipe: &Recipe,
    annual: Option<&RawPanel>,
    cfg: &IngestConfig,
) -> Result<RawPanel, CliError> {
    Ok(ingest(daily, recipe, annual, cfg)?)
}

/// Discretize `panel` into a catalog and dataset.
pub fn discretize(
    panel: &RawPanel,
    kc: Option<&KnowledgeConstraints>,
    opts: &LearnOptions,
) -> Result<DiscretizedDataset, CliError> {
    let mut plan = CatalogPlan::new(opts.target.clone());
    plan.target_edges = opts.target_edges.clone();
    plan.max_bins = opts.max_bins;
    plan.derived = opts.derived.clone();
    if let Some(kc) = kc {
        plan.tiers = kc.tiers().clone();
    }
    let catalog = build_catalog(panel, &plan)?;
    Ok(DiscretizedDataset::from_panel(panel, &catalog)?)
}

/// Discretize, search for a structure, fit parameters and compute edge
/// strengths.
pub fn learn(
    panel: &RawPanel,
    kc: Option<&KnowledgeConstraints>,
    opts: &LearnOptions,
) -> Result<LearnOutcome, CliError> {
    if panel.is_empty() {
        return Err(CliError::input("training panel has no rows"));
    }
    let data = discretize(panel, kc, opts)?;
    let kc = kc.cloned().unwrap_or_default().with_catalog_tiers(data.catalog());
    let scored = learn_structure(&data, &kc, &opts.search)?;
    info!(score = scored.score, edges = scored.dag.edge_count(), "structure search finished");

    let missing_fraction = data.missing_fraction();
    let (cpts, em) = if missing_fraction > opts.em_threshold {
        let r = em_fit(&scored.dag, &data, opts.alpha, opts.em_tol, opts.em_max_iters)?;
        if !r.converged {
            warn!(iterations = r.iterations, "EM stopped before converging");
        }
        (r.cpts, Some((r.iterations, r.converged)))
    } else {
        (fit_parameters(&scored.dag, &data, opts.alpha)?, None)
    };
    let net = BayesNet::new(data.catalog().clone(), scored.dag.clone(), cpts)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let model = LearnedModel::new(net, Some(&data))?;
    Ok(LearnOutcome {
        model,
        data,
        bic: scored.score,
        missing_fraction,
        em,
    })
}

/// Split whole county-year rows into (train, test). With `by_year`, whole
/// years go to one side.
pub fn split_panel(
    panel: &RawPanel,
    fraction: f64,
    seed: u64,
    by_year: bool,
) -> Result<(RawPanel, RawPanel), CliError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::input(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    if by_year {
        let mut years: Vec<i32> = panel
            .rows()
            .iter()
            .map(|r| r.year)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if years.len() < 2 {
            return Err(CliError::input("splitting by year needs at least two years"));
        }
        years.shuffle(&mut rng);
        let k = ((fraction * years.len() as f64).round() as usize).clamp(1, years.len() - 1);
        let train_years: BTreeSet<i32> = years[..k].iter().copied().collect();
        for (i, r) in panel.rows().iter().enumerate() {
            if train_years.contains(&r.year) {
                train.push(i);
            } else {
                test.push(i);
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..panel.len()).collect();
        idx.shuffle(&mut rng);
        let k = (fraction * idx.len() as f64).round() as usize;
        train = idx[..k].to_vec();
        test = idx[k..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
    }
    Ok((panel.select(&train), panel.select(&test)))
}

/// Columns of `panel` the model knows, excluding the target.
fn evidence_columns(catalog: &VariableCatalog, panel: &RawPanel) -> Vec<(usize, usize)> {
    let target = &catalog.target().name;
    let mut cols = Vec::new();
    for (j, name) in panel.columns().iter().enumerate() {
        if name == target {
            continue;
        }
        match catalog.index_of(name) {
            Ok(i) => cols.push((j, i)),
            Err(_) => warn!(column = %name, "column is not a model variable; ignored"),
        }
    }
    cols
}

pub struct Prediction {
    pub county_fips: String,
    pub year: i32,
    /// The error message when the row's evidence is impossible.
    pub forecast: Result<YieldForecast, String>,
}

/// Forecast every panel row from whatever model variables it has.
pub fn predict(net: &BayesNet, panel: &RawPanel) -> Result<Vec<Prediction>, CliError> {
    let catalog = net.catalog();
    let cols = evidence_columns(catalog, panel);
    let mut out = Vec::with_capacity(panel.len());
    for row in panel.rows() {
        let pairs = cols.iter().filter_map(|&(j, i)| {
            let spec = catalog.get(i);
            row.values[j].map(|v| (spec.name.clone(), spec.bins.bin_of(v)))
        });
        let ev = EvidenceSet::for_forecast(catalog, pairs)?;
        let forecast = match expected_yield(net, &ev) {
            Ok(f) => Ok(f),
            Err(e @ hb_core::inference::InferenceError::ImpossibleEvidence { .. }) => Err(e.to_string()),
            Err(e) => return Err(CliError::runtime(e.to_string())),
        };
        out.push(Prediction {
            county_fips: row.county_fips.clone(),
            year: row.year,
            forecast,
        });
    }
    Ok(out)
}

/// `county_fips,year,expected_yield,p_<label>...,error`.
pub fn write_predictions<W: Write>(net: &BayesNet, rows: &[Prediction], writer: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::runtime(e.to_string());
    let labels = net.catalog().target().bins.labels();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["county_fips".to_string(), "year".into(), "expected_yield".into()];
    header.extend(labels.iter().map(|l| format!("p_{l}")));
    header.push("error".into());
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.county_fips.clone(), r.year.to_string()];
        match &r.forecast {
            Ok(f) => {
                rec.push(f.expected_yield.to_string());
                rec.extend(f.posterior.probs.iter().map(f64::to_string));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), labels.len() + 1));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::runtime(e.to_string()))
}

/// Forecast every row of a test panel that has an observed target.
pub fn evaluate_panel(net: &BayesNet, panel: &RawPanel, thresholds: &[f64]) -> Result<EvaluationReport, CliError> {
    let catalog = net.catalog();
    let data = DiscretizedDataset::from_panel(panel, catalog)?;
    let cases = cases_from_dataset(&data, Some(panel));
    Ok(evaluate(net, &cases, thresholds)?)
}

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tracing::info;

use hb_core::learning::{LearnedModel, SearchConfig};
use hb_core::model::KnowledgeConstraints;
use hb_core::pipeline::{
    AggregateConfig, DailyTable, IngestConfig, RawPanel, Recipe, SchemeSidecar, DEFAULT_T_BASE,
};
use hb_core::synthetic::{iowa_like_panel, IowaLikeConfig};

use crate::commands::{self, LearnOptions};
use crate::error::CliError;
use crate::server;

#[derive(Debug, Parser)]
#[command(name = "hb", version, about = "County-level crop-yield forecasting with discrete Bayesian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate daily weather into a county-year panel CSV.
    Ingest(IngestArgs),
    /// Split a panel into train and test CSVs by county-year rows.
    Split(SplitArgs),
    /// Discretize a panel into bin indices plus a bin-scheme sidecar.
    Discretize(DiscretizeArgs),
    /// Learn structure and parameters; write the model JSON.
    Learn(LearnArgs),
    /// Forecast every row of a panel.
    Predict(PredictArgs),
    /// Confusion matrix and per-county errors on a test panel.
    Eval(EvalArgs),
    /// Serve a model over HTTP.
    Serve(ServeArgs),
    /// Write a synthetic daily table, annual panel, recipe and constraints.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Daily CSV: county_fips, year, month, day and weather columns.
    pub daily: PathBuf,
    #[arg(long)]
    pub recipe: PathBuf,
    /// County-year CSV of annual columns (soil, drought index, yield, ...).
    #[arg(long)]
    pub annual: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_T_BASE)]
    pub t_base: f64,
    #[arg(long, default_value_t = 0.8)]
    pub min_coverage: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub panel: PathBuf,
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = 0.75)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Keep whole years together.
    #[arg(long)]
    pub split_by_year: bool,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct BinningArgs {
    #[arg(long, default_value = "Yield")]
    pub target: String,
    /// Maximum bins per non-target variable.
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
    /// Comma-separated interior edges for the target.
    #[arg(long, value_delimiter = ',', default_values_t = hb_core::pipeline::DEFAULT_YIELD_EDGES)]
    pub target_edges: Vec<f64>,
    /// Constraint JSON; its tiers are recorded on the variables.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Recipe JSON; its outputs are recorded as derived variables.
    #[arg(long)]
    pub recipe: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    pub panel: PathBuf,
    #[command(flatten)]
    pub binning: BinningArgs,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub schemes: PathBuf,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    pub panel: PathBuf,
    #[command(flatten)]
    pub binning: BinningArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 4)]
    pub max_parents: usize,
    #[arg(long, default_value_t = 10)]
    pub tabu_length: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Dirichlet pseudo-count added to every CPT cell.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub em_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub em_max_iters: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Panel CSV of evidence; empty or NA cells are unobserved.
    pub panel: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub panel: PathBuf,
    /// Percent-error thresholds to count counties under.
    #[arg(long = "threshold", default_values_t = [20.0])]
    pub thresholds: Vec<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the per-county table as CSV.
    #[arg(long)]
    pub county_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 99)]
    pub counties: usize,
    #[arg(long, default_value_t = 6)]
    pub years: usize,
    #[arg(long, default_value_t = 2005)]
    pub first_year: i32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(e.to_string()).context(path.display()))
}

fn read_panel(path: &Path) -> Result<RawPanel, CliError> {
    let text = read_text(path)?;
    RawPanel::read_csv(text.as_bytes()).map_err(|e| CliError::from(e).context(path.display()))
}

fn read_constraints(path: &Path) -> Result<KnowledgeConstraints, CliError> {
    KnowledgeConstraints::from_json(&read_text(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

fn read_recipe(path: &Path) -> Result<Recipe, CliError> {
    Recipe::from_json(&read_text(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn read_model(path: &Path) -> Result<LearnedModel, CliError> {
    LearnedModel::from_json(&read_text(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

/// Write to `path`, or stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::runtime(e.to_string()).context(p.display())),
        None => io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::runtime(e.to_string())),
    }
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

impl BinningArgs {
    fn resolve(&self) -> Result<(Option<KnowledgeConstraints>, LearnOptions), CliError> {
        let kc = self.constraints.as_deref().map(read_constraints).transpose()?;
        let mut opts = LearnOptions {
            target: self.target.clone(),
            max_bins: self.bins,
            target_edges: Some(self.target_edges.clone()),
            ..LearnOptions::default()
        };
        if let Some(p) = &self.recipe {
            opts.derived = read_recipe(p)?.output_names().map(String::from).collect();
        }
        Ok((kc, opts))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => {
            let text = read_text(&a.daily)?;
            let daily = DailyTable::read_csv(text.as_bytes()).map_err(|e| CliError::from(e).context(a.daily.display()))?;
            let recipe = read_recipe(&a.recipe)?;
            let annual = a.annual.as_deref().map(read_panel).transpose()?;
            let cfg = IngestConfig {
                aggregate: AggregateConfig {
                    t_base: a.t_base,
                    ..AggregateConfig::default()
                },
                min_coverage: a.min_coverage,
            };
            let panel = commands::run_ingest(&daily, &recipe, annual.as_ref(), &cfg)?;
            info!(rows = panel.len(), "ingested");
            let bytes = csv_bytes(|b| panel.write_csv(b).map_err(CliError::from))?;
            emit(a.output.as_deref(), &bytes)
        }
        Command::Split(a) => {
            let panel = read_panel(&a.panel)?;
            let (train, test) = commands::split_panel(&panel, a.split, a.split_seed, a.split_by_year)?;
            info!(train = train.len(), test = test.len(), "split");
            emit(Some(&a.train), &csv_bytes(|b| train.write_csv(b).map_err(CliError::from))?)?;
            emit(Some(&a.test), &csv_bytes(|b| test.write_csv(b).map_err(CliError::from))?)
        }
        Command::Discretize(a) => {
            let panel = read_panel(&a.panel)?;
            let (kc, opts) = a.binning.resolve()?;
            let data = commands::discretize(&panel, kc.as_ref(), &opts)?;
            emit(Some(&a.output), &csv_bytes(|b| data.write_csv(b).map_err(CliError::from))?)?;
            emit(Some(&a.schemes), &pretty_json(&SchemeSidecar::from_catalog(data.catalog()))?)
        }
        Command::Learn(a) => {
            let panel = read_panel(&a.panel)?;
            let (kc, mut opts) = a.binning.resolve()?;
            opts.search = SearchConfig {
                restarts: a.restarts,
                max_parents: a.max_parents,
                rng_seed: a.seed,
                tabu_length: a.tabu_length,
                max_iters_per_restart: a.max_iters,
            };
            opts.alpha = a.alpha;
            opts.em_tol = a.em_tol;
            opts.em_max_iters = a.em_max_iters;
            let out = commands::learn(&panel, kc.as_ref(), &opts)?;
            info!(
                bic = out.bic,
                edges = out.model.net.dag().edge_count(),
                missing = out.missing_fraction,
                em = ?out.em,
                "learned"
            );
            emit(a.output.as_deref(), out.model.to_json().as_bytes())
        }
        Command::Predict(a) => {
            let model = read_model(&a.model)?;
            let panel = read_panel(&a.panel)?;
            let rows = commands::predict(&model.net, &panel)?;
            let bytes = csv_bytes(|b| commands::write_predictions(&model.net, &rows, b))?;
            emit(a.output.as_deref(), &bytes)
        }
        Command::Eval(a) => {
            let model = read_model(&a.model)?;
            let panel = read_panel(&a.panel)?;
            let report = commands::evaluate_panel(&model.net, &panel, &a.thresholds)?;
            if let Some(acc) = report.accuracy {
                info!(accuracy = acc, cases = report.confusion.total(), "evaluated");
            }
            if let Some(p) = &a.county_csv {
                let bytes = csv_bytes(|b| report.write_county_csv(b).map_err(CliError::from))?;
                emit(Some(p), &bytes)?;
            }
            emit(a.output.as_deref(), report.to_json().as_bytes())
        }
        Command::Serve(a) => {
            let model = read_model(&a.model)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::runtime(e.to_string()))?;
            rt.block_on(server::serve(model, a.bind))
                .map_err(|e| CliError::runtime(e.to_string()))
        }
        Command::Synth(a) => {
            let panel = iowa_like_panel(&IowaLikeConfig {
                counties: a.counties,
                first_year: a.first_year,
                years: a.years,
                seed: a.seed,
                ..IowaLikeConfig::default()
            });
            fs::create_dir_all(&a.out_dir).map_err(|e| CliError::runtime(e.to_string()))?;
            let dir = &a.out_dir;
            emit(
                Some(&dir.join("daily.csv")),
                &csv_bytes(|b| panel.daily.write_csv(b).map_err(CliError::from))?,
            )?;
            emit(
                Some(&dir.join("annual.csv")),
                &csv_bytes(|b| panel.annual.write_csv(b).map_err(CliError::from))?,
            )?;
            emit(Some(&dir.join("recipe.json")), &pretty_json(&panel.recipe)?)?;
            emit(Some(&dir.join("constraints.json")), &pretty_json(&panel.constraints)?)
        }
    }
}


//! Panel ingestion, derived agronomic variables and discretization.

mod dataset;
mod discretize;
mod panel;
mod recipe;
mod weather;

pub use dataset::{
    build_catalog, CatalogPlan, DiscreteRow, DiscretizedDataset, SchemeSidecar, DEFAULT_YIELD_EDGES,
};
pub use discretize::{compute_bin_means, discretize_column, MICRO_BINS};
pub use panel::{format_cell, parse_cell, PanelRow, RawPanel, COUNTY_COLUMN, YEAR_COLUMN};
pub use recipe::{
    ingest, month_abbrev, DailyRow, DailyTable, IngestConfig, Recipe, RecipeEntry, DAY_COLUMN,
    MONTH_COLUMN,
};
pub use weather::{
    aggregate_month, compute_gdd, days_in_month, AggregateConfig, AggregateMode, DailyWeather,
    MonthlyAggregate, DEFAULT_T_BASE, GDD_TMAX_CAP, GDD_TMIN_FLOOR,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("t_max {t_max} is below t_min {t_min}")]
    InvalidRange { t_max: f64, t_min: f64 },
    #[error("no usable days in month {0}")]
    EmptyMonth(u32),
    #[error("month {0} is outside the configured season")]
    MonthOutOfSeason(u32),
    #[error("column has fewer than two distinct values")]
    DegenerateColumn,
    #[error("bin {bin} ({label}) contains no training values")]
    EmptyBin { bin: usize, label: String },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("duplicate row for county {county_fips}, year {year}")]
    DuplicateKey { county_fips: String, year: i32 },
    #[error("schema violation{}{}: {message}",
        row.map(|r| format!(" at row {r}")).unwrap_or_default(),
        column.as_ref().map(|c| format!(" in column `{c}`")).unwrap_or_default())]
    Schema {
        row: Option<usize>,
        column: Option<String>,
        message: String,
    },
    #[error("invalid recipe: {0}")]
    Recipe(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("column `{column}`: {source}")]
    InColumn {
        column: String,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl PipelineError {
    pub(crate) fn in_column(self, column: &str) -> PipelineError {
        PipelineError::InColumn {
            column: column.to_string(),
            source: Box::new(self),
        }
    }
}

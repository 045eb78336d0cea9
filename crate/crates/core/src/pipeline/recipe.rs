use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::panel::{csv_err, find_required, format_cell, parse_cell, PanelRow, RawPanel, COUNTY_COLUMN, YEAR_COLUMN};
use super::weather::{aggregate_month, days_in_month, AggregateConfig, AggregateMode, DailyWeather};
use super::PipelineError;

pub const MONTH_COLUMN: &str = "month";
pub const DAY_COLUMN: &str = "day";

/// One derived panel column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeEntry {
    pub output_name: String,
    pub mode: AggregateMode,
    pub month: u32,
    /// Daily columns read by `mode`: `[t_max, t_min]` for temperature modes,
    /// `[precip]` for rainfall. Empty means those default names.
    #[serde(default)]
    pub inputs: Vec<String>,
}

impl RecipeEntry {
    fn input_columns(&self) -> Vec<String> {
        if !self.inputs.is_empty() {
            return self.inputs.clone();
        }
        match self.mode {
            AggregateMode::RainTotal => vec!["precip".into()],
            _ => vec!["t_max".into(), "t_min".into()],
        }
    }
}

/// Ordered list of derived variables; the JSON form is a bare array.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Recipe {
    pub entries: Vec<RecipeEntry>,
}

impl Recipe {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Recipe(e.to_string()))
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.output_name.as_str())
    }

    /// Monthly GDD sums and rainfall totals for `months`, named `GDD_May`,
    /// `RF_May`, ...
    pub fn monthly_gdd_and_rain(months: &[u32]) -> Recipe {
        let mut entries = Vec::new();
        for &m in months {
            entries.push(RecipeEntry {
                output_name: format!("GDD_{}", month_abbrev(m)),
                mode: AggregateMode::GddSum,
                month: m,
                inputs: vec![],
            });
        }
        for &m in months {
            entries.push(RecipeEntry {
                output_name: format!("RF_{}", month_abbrev(m)),
                mode: AggregateMode::RainTotal,
                month: m,
                inputs: vec![],
            });
        }
        Recipe { entries }
    }
}

pub fn month_abbrev(m: u32) -> &'static str {
    const NAMES: [&str; 12] = [
        "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
    ];
    NAMES[(m as usize).saturating_sub(1).min(11)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyRow {
    pub county_fips: String,
    pub date: NaiveDate,
    pub values: Vec<Option<f64>>,
}

/// Daily station records: `county_fips, year, month, day` plus value columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyTable {
    pub columns: Vec<String>,
    pub rows: Vec<DailyRow>,
}

impl DailyTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PipelineError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let key_cols = [
            find_required(&headers, COUNTY_COLUMN)?,
            find_required(&headers, YEAR_COLUMN)?,
            find_required(&headers, MONTH_COLUMN)?,
            find_required(&headers, DAY_COLUMN)?,
        ];
        let value_cols: Vec<usize> = (0..headers.len()).filter(|j| !key_cols.contains(j)).collect();
        let columns = value_cols.iter().map(|&j| headers[j].clone()).collect();

        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let schema = |column: &str, message: String| PipelineError::Schema {
                row: Some(line),
                column: Some(column.to_string()),
                message,
            };
            let int = |j: usize, name: &str| {
                rec[j]
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| schema(name, format!("`{}` is not an integer", &rec[j])))
            };
            let county_fips = rec[key_cols[0]].trim().to_string();
            let year = int(key_cols[1], YEAR_COLUMN)?;
            let month = int(key_cols[2], MONTH_COLUMN)?;
            let day = int(key_cols[3], DAY_COLUMN)?;
            let date = NaiveDate::from_ymd_opt(year as i32, month as u32, day as u32)
                .ok_or_else(|| schema(DAY_COLUMN, format!("{year}-{month}-{day} is not a date")))?;
            if !seen.insert((county_fips.clone(), date)) {
                return Err(schema(DAY_COLUMN, format!("duplicate record for {county_fips} on {date}")));
            }
            let mut values = Vec::with_capacity(value_cols.len());
            for &j in &value_cols {
                values.push(parse_cell(&rec[j]).map_err(|m| schema(&headers[j], m))?);
            }
            rows.push(DailyRow {
                county_fips,
                date,
                values,
            });
        }
        Ok(DailyTable { columns, rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PipelineError> {
        use chrono::Datelike;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![COUNTY_COLUMN, YEAR_COLUMN, MONTH_COLUMN, DAY_COLUMN];
        header.extend(self.columns.iter().map(String::as_str));
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.county_fips.clone(),
                row.date.year().to_string(),
                row.date.month().to_string(),
                row.date.day().to_string(),
            ];
            rec.extend(row.values.iter().map(|&v| format_cell(v)));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| PipelineError::Io(e.to_string()))
    }

    fn column_index(&self, name: &str) -> Result<usize, PipelineError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub aggregate: AggregateConfig,
    /// Fraction of a month's calendar days that must be usable; below it the
    /// monthly value is emitted as missing.
    pub min_coverage: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            aggregate: AggregateConfig::default(),
            min_coverage: 0.8,
        }
    }
}

/// Aggregate daily records into a county-year panel and join any annual
/// (non-daily) columns. Output rows are sorted by (county, year).
pub fn ingest(
    daily: &DailyTable,
    recipe: &Recipe,
    annual: Option<&RawPanel>,
    cfg: &IngestConfig,
) -> Result<RawPanel, PipelineError> {
    let mut inputs = Vec::with_capacity(recipe.entries.len());
    for e in &recipe.entries {
        if e.month < cfg.aggregate.season.0 || e.month > cfg.aggregate.season.1 {
            return Err(PipelineError::MonthOutOfSeason(e.month));
        }
        let cols = e.input_columns();
        let expected = if e.mode == AggregateMode::RainTotal { 1 } else { 2 };
        if cols.len() != expected {
            return Err(PipelineError::Recipe(format!(
                "`{}` needs {expected} input column(s), got {}",
                e.output_name,
                cols.len()
            )));
        }
        let idx = cols
            .iter()
            .map(|c| daily.column_index(c))
            .collect::<Result<Vec<_>, _>>()?;
        inputs.push(idx);
    }

    let mut groups: BTreeMap<(String, i32), Vec<usize>> = BTreeMap::new();
    for (i, r) in daily.rows.iter().enumerate() {
        use chrono::Datelike;
        groups
            .entry((r.county_fips.clone(), r.date.year()))
            .or_default()
            .push(i);
    }
    if let Some(a) = annual {
        for r in a.rows() {
            groups.entry((r.county_fips.clone(), r.year)).or_default();
        }
    }

    let mut columns: Vec<String> = recipe.output_names().map(str::to_string).collect();
    if let Some(a) = annual {
        columns.extend(a.columns().iter().cloned());
    }
    let annual_lookup: BTreeMap<(String, i32), &PanelRow> = annual
        .map(|a| {
            a.rows()
                .iter()
                .map(|r| ((r.county_fips.clone(), r.year), r))
                .collect()
        })
        .unwrap_or_default();

    let mut rows = Vec::with_capacity(groups.len());
    for ((county, year), idx) in groups {
        let mut values = Vec::with_capacity(columns.len());
        for (e, cols) in recipe.entries.iter().zip(&inputs) {
            let mut days = Vec::new();
            for &i in &idx {
                let r = &daily.rows[i];
                let day = if e.mode == AggregateMode::RainTotal {
                    DailyWeather::new(r.date, None, None, r.values[cols[0]])
                } else {
                    DailyWeather::new(r.date, r.values[cols[0]], r.values[cols[1]], None)
                };
                days.push(day.map_err(|err| PipelineError::Schema {
                    row: None,
                    column: Some(daily.columns[cols[0]].clone()),
                    message: format!("{county} {}: {err}", r.date),
                })?);
            }
            let value = match aggregate_month(&days, e.month, e.mode, &cfg.aggregate) {
                Ok(agg) => {
                    let coverage = agg.used_days as f64 / days_in_month(year, e.month) as f64;
                    (coverage >= cfg.min_coverage).then_some(agg.value)
                }
                Err(PipelineError::EmptyMonth(_)) => None,
                Err(other) => return Err(other),
            };
            values.push(value);
        }
        if let Some(a) = annual {
            match annual_lookup.get(&(county.clone(), year)) {
                Some(r) => values.extend(r.values.iter().copied()),
                None => values.extend(std::iter::repeat_n(None, a.columns().len())),
            }
        }
        rows.push(PanelRow {
            county_fips: county,
            year,
            values,
        });
    }
    RawPanel::new(columns, rows)
}

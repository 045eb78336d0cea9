use std::collections::HashSet;
use std::io::{Read, Write};

use super::PipelineError;

pub const COUNTY_COLUMN: &str = "county_fips";
pub const YEAR_COLUMN: &str = "year";

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub county_fips: String,
    pub year: i32,
    /// One cell per panel column; `None` is a missing value.
    pub values: Vec<Option<f64>>,
}

/// County-year table of real-valued columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    columns: Vec<String>,
    rows: Vec<PanelRow>,
}

/// Missing cells are an empty field or `NA` in any case.
pub fn parse_cell(field: &str) -> Result<Option<f64>, String> {
    let t = field.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("`{t}` is not a finite number")),
    }
}

pub fn format_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "NA".to_string(),
    }
}

impl RawPanel {
    pub fn new(columns: Vec<String>, rows: Vec<PanelRow>) -> Result<Self, PipelineError> {
        let mut seen_cols = HashSet::new();
        for c in &columns {
            if c == COUNTY_COLUMN || c == YEAR_COLUMN || !seen_cols.insert(c) {
                return Err(PipelineError::Schema {
                    row: None,
                    column: Some(c.clone()),
                    message: "duplicate column".into(),
                });
            }
        }
        let mut keys = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if r.values.len() != columns.len() {
                return Err(PipelineError::Schema {
                    row: Some(i + 1),
                    column: None,
                    message: format!("{} values for {} columns", r.values.len(), columns.len()),
                });
            }
            if !keys.insert((r.county_fips.clone(), r.year)) {
                return Err(PipelineError::DuplicateKey {
                    county_fips: r.county_fips.clone(),
                    year: r.year,
                });
            }
        }
        Ok(RawPanel { columns, rows })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize, PipelineError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
    }

    /// Every cell of one column, in row order.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>, PipelineError> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r.values[j]).collect())
    }

    /// Panel restricted to the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> RawPanel {
        RawPanel {
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Rows sorted by (county, year).
    pub fn sorted(mut self) -> RawPanel {
        self.rows
            .sort_by(|a, b| (&a.county_fips, a.year).cmp(&(&b.county_fips, b.year)));
        self
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let county_at = find_required(&headers, COUNTY_COLUMN)?;
        let year_at = find_required(&headers, YEAR_COLUMN)?;
        let value_cols: Vec<usize> = (0..headers.len())
            .filter(|&j| j != county_at && j != year_at)
            .collect();
        let columns: Vec<String> = value_cols.iter().map(|&j| headers[j].clone()).collect();

        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let county_fips = rec[county_at].trim().to_string();
            if county_fips.is_empty() {
                return Err(PipelineError::Schema {
                    row: Some(line),
                    column: Some(COUNTY_COLUMN.into()),
                    message: "empty county_fips".into(),
                });
            }
            let year = rec[year_at].trim().parse::<i32>().map_err(|_| PipelineError::Schema {
                row: Some(line),
                column: Some(YEAR_COLUMN.into()),
                message: format!("`{}` is not an integer year", &rec[year_at]),
            })?;
            let mut values = Vec::with_capacity(value_cols.len());
            for &j in &value_cols {
                values.push(parse_cell(&rec[j]).map_err(|message| PipelineError::Schema {
                    row: Some(line),
                    column: Some(headers[j].clone()),
                    message,
                })?);
            }
            rows.push(PanelRow {
                county_fips,
                year,
                values,
            });
        }
        RawPanel::new(columns, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![COUNTY_COLUMN.to_string(), YEAR_COLUMN.to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.county_fips.clone(), r.year.to_string()];
            rec.extend(r.values.iter().map(|&v| format_cell(v)));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| PipelineError::Io(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn find_required(headers: &[String], name: &str) -> Result<usize, PipelineError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
}

pub(crate) fn csv_err(e: csv::Error) -> PipelineError {
    let row = e.position().map(|p| p.line() as usize);
    PipelineError::Schema {
        row,
        column: None,
        message: e.to_string(),
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::model::{BinScheme, VariableCatalog, VariableKind, VariableSpec};

use super::discretize::{compute_bin_means, discretize_column};
use super::panel::{csv_err, find_required, RawPanel, COUNTY_COLUMN, YEAR_COLUMN};
use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteRow {
    pub county_fips: String,
    pub year: i32,
    /// One entry per catalog variable, in catalog order.
    pub bins: Vec<Option<usize>>,
}

/// Training data `D`: bin indices for every catalog variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDataset {
    catalog: VariableCatalog,
    rows: Vec<DiscreteRow>,
}

impl DiscretizedDataset {
    pub fn new(catalog: VariableCatalog, rows: Vec<DiscreteRow>) -> Result<Self, PipelineError> {
        let cards = catalog.cardinalities();
        for (i, r) in rows.iter().enumerate() {
            if r.bins.len() != cards.len() {
                return Err(PipelineError::Schema {
                    row: Some(i + 1),
                    column: None,
                    message: format!("{} cells for {} variables", r.bins.len(), cards.len()),
                });
            }
            for (j, b) in r.bins.iter().enumerate() {
                if let Some(b) = *b {
                    if b >= cards[j] {
                        return Err(PipelineError::Schema {
                            row: Some(i + 1),
                            column: Some(catalog.get(j).name.clone()),
                            message: format!("bin {b} out of range ({} bins)", cards[j]),
                        });
                    }
                }
            }
        }
        Ok(DiscretizedDataset { catalog, rows })
    }

    /// Bin every panel column named in the catalog; other columns are ignored.
    pub fn from_panel(panel: &RawPanel, catalog: &VariableCatalog) -> Result<Self, PipelineError> {
        let cols: Vec<Option<usize>> = catalog
            .variables()
            .iter()
            .map(|v| panel.columns().iter().position(|c| *c == v.name))
            .collect();
        for (v, c) in catalog.variables().iter().zip(&cols) {
            if c.is_none() && v.kind == VariableKind::Target {
                return Err(PipelineError::MissingColumn(v.name.clone()));
            }
        }
        Self::bin_panel(panel, catalog, &cols)
    }

    /// Like [`DiscretizedDataset::from_panel`], but catalog variables absent
    /// from the panel (including the target) are simply all-missing.
    pub fn from_partial_panel(panel: &RawPanel, catalog: &VariableCatalog) -> Result<Self, PipelineError> {
        let cols: Vec<Option<usize>> = catalog
            .variables()
            .iter()
            .map(|v| panel.columns().iter().position(|c| *c == v.name))
            .collect();
        Self::bin_panel(panel, catalog, &cols)
    }

    fn bin_panel(
        panel: &RawPanel,
        catalog: &VariableCatalog,
        cols: &[Option<usize>],
    ) -> Result<Self, PipelineError> {
        let rows = panel
            .rows()
            .iter()
            .map(|r| DiscreteRow {
                county_fips: r.county_fips.clone(),
                year: r.year,
                bins: catalog
                    .variables()
                    .iter()
                    .zip(cols)
                    .map(|(v, c)| c.and_then(|j| r.values[j]).map(|x| v.bins.bin_of(x)))
                    .collect(),
            })
            .collect();
        DiscretizedDataset::new(catalog.clone(), rows)
    }

    pub fn catalog(&self) -> &VariableCatalog {
        &self.catalog
    }

    pub fn rows(&self) -> &[DiscreteRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Fraction of all cells that are missing.
    pub fn missing_fraction(&self) -> f64 {
        let cells = self.rows.len() * self.catalog.len();
        if cells == 0 {
            return 0.0;
        }
        let missing: usize = self
            .rows
            .iter()
            .map(|r| r.bins.iter().filter(|b| b.is_none()).count())
            .sum();
        missing as f64 / cells as f64
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().any(|r| r.bins.iter().any(Option::is_none))
    }

    pub fn select(&self, indices: &[usize]) -> DiscretizedDataset {
        DiscretizedDataset {
            catalog: self.catalog.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Same rows under a catalog with identical variables and cardinalities.
    pub fn with_catalog(&self, catalog: VariableCatalog) -> Result<Self, PipelineError> {
        DiscretizedDataset::new(catalog, self.rows.clone())
    }

    /// CSV of bin indices (`NA` for missing) in catalog column order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![COUNTY_COLUMN.to_string(), YEAR_COLUMN.to_string()];
        header.extend(self.catalog.names().map(str::to_string));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.county_fips.clone(), r.year.to_string()];
            rec.extend(
                r.bins
                    .iter()
                    .map(|b| b.map_or_else(|| "NA".to_string(), |b| b.to_string())),
            );
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| PipelineError::Io(e.to_string()))
    }

    /// Read bin indices written by [`DiscretizedDataset::write_csv`].
    pub fn read_csv<R: Read>(reader: R, catalog: &VariableCatalog) -> Result<Self, PipelineError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let county_at = find_required(&headers, COUNTY_COLUMN)?;
        let year_at = find_required(&headers, YEAR_COLUMN)?;
        let cols = catalog
            .names()
            .map(|n| find_required(&headers, n))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let bad = |column: &str| PipelineError::Schema {
                row: Some(i + 2),
                column: Some(column.to_string()),
                message: "not a bin index".into(),
            };
            let year = rec[year_at].trim().parse().map_err(|_| bad(YEAR_COLUMN))?;
            let mut bins = Vec::with_capacity(cols.len());
            for &j in &cols {
                let cell = rec[j].trim();
                bins.push(if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                    None
                } else {
                    Some(cell.parse().map_err(|_| bad(&headers[j]))?)
                });
            }
            rows.push(DiscreteRow {
                county_fips: rec[county_at].trim().to_string(),
                year,
                bins,
            });
        }
        DiscretizedDataset::new(catalog.clone(), rows)
    }
}

/// Sidecar JSON describing the bin schemes of a discretized dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSidecar {
    pub variables: Vec<VariableSpec>,
}

impl SchemeSidecar {
    pub fn from_catalog(catalog: &VariableCatalog) -> Self {
        SchemeSidecar {
            variables: catalog.variables().to_vec(),
        }
    }

    pub fn into_catalog(self) -> Result<VariableCatalog, PipelineError> {
        // BinScheme's serde form bypasses its constructor; re-check.
        let mut vars = Vec::with_capacity(self.variables.len());
        for mut v in self.variables {
            v.bins = BinScheme::from_parts(
                v.bins.edges().to_vec(),
                v.bins.labels().to_vec(),
                v.bins.bin_means().map(<[f64]>::to_vec),
            )
            .map_err(|e| PipelineError::InvalidArgument(e.to_string()))?;
            vars.push(v);
        }
        VariableCatalog::new(vars).map_err(|e| PipelineError::InvalidArgument(e.to_string()))
    }
}

/// The yield bin edges used unless overridden (bu/ac).
pub const DEFAULT_YIELD_EDGES: [f64; 3] = [131.0, 149.0, 178.0];

/// How to turn a panel into a catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogPlan {
    pub target: String,
    /// Fixed target edges; `None` discretizes the target like any column.
    pub target_edges: Option<Vec<f64>>,
    pub max_bins: usize,
    pub tiers: BTreeMap<String, u32>,
    pub derived: BTreeSet<String>,
    /// Columns to model; `None` takes every panel column.
    pub columns: Option<Vec<String>>,
}

impl CatalogPlan {
    pub fn new(target: impl Into<String>) -> Self {
        CatalogPlan {
            target: target.into(),
            target_edges: Some(DEFAULT_YIELD_EDGES.to_vec()),
            max_bins: 4,
            tiers: BTreeMap::new(),
            derived: BTreeSet::new(),
            columns: None,
        }
    }
}

/// Discretize every modelled column of `panel` and attach per-bin means.
///
/// The target is binned first (fixed edges by default); every other column
/// is then discretized supervised by the target bins on rows where both are
/// present, or unsupervised when no such rows exist.
pub fn build_catalog(panel: &RawPanel, plan: &CatalogPlan) -> Result<VariableCatalog, PipelineError> {
    let columns: Vec<String> = match &plan.columns {
        Some(c) => c.clone(),
        None => panel.columns().to_vec(),
    };
    if !columns.contains(&plan.target) {
        return Err(PipelineError::MissingColumn(plan.target.clone()));
    }
    let target_cells = panel.column(&plan.target)?;
    let target_values: Vec<f64> = target_cells.iter().flatten().copied().collect();
    let target_scheme = match &plan.target_edges {
        Some(edges) => {
            if target_values.iter().all(|&v| v >= 0.0) {
                BinScheme::non_negative(edges.clone())
            } else {
                BinScheme::new(edges.clone())
            }
            .map_err(|e| PipelineError::InvalidArgument(e.to_string()))?
        }
        None => discretize_column(&target_values, None, plan.max_bins)
            .map_err(|e| e.in_column(&plan.target))?,
    };
    let target_scheme =
        compute_bin_means(&target_values, &target_scheme).map_err(|e| e.in_column(&plan.target))?;
    let target_bins: Vec<Option<usize>> = target_cells
        .iter()
        .map(|c| c.map(|v| target_scheme.bin_of(v)))
        .collect();

    let mut vars = Vec::with_capacity(columns.len());
    for name in &columns {
        let tier = plan.tiers.get(name).copied().unwrap_or(0);
        if *name == plan.target {
            vars.push(VariableSpec {
                name: name.clone(),
                kind: VariableKind::Target,
                tier,
                bins: target_scheme.clone(),
            });
            continue;
        }
        let cells = panel.column(name)?;
        let paired: Vec<(f64, usize)> = cells
            .iter()
            .zip(&target_bins)
            .filter_map(|(c, t)| Some(((*c)?, (*t)?)))
            .collect();
        let all: Vec<f64> = cells.iter().flatten().copied().collect();
        let distinct_paired = paired.iter().any(|p| p.0 != paired[0].0);
        let scheme = if distinct_paired {
            let (vals, labels): (Vec<f64>, Vec<usize>) = paired.into_iter().unzip();
            discretize_column(&vals, Some(&labels), plan.max_bins)
        } else {
            discretize_column(&all, None, plan.max_bins)
        }
        .map_err(|e| e.in_column(name))?;
        let scheme = compute_bin_means(&all, &scheme).map_err(|e| e.in_column(name))?;
        let kind = if plan.derived.contains(name) {
            VariableKind::Derived
        } else {
            VariableKind::Raw
        };
        vars.push(VariableSpec {
            name: name.clone(),
            kind,
            tier,
            bins: scheme,
        });
    }
    VariableCatalog::new(vars).map_err(|e| PipelineError::InvalidArgument(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::PanelRow;

    fn panel() -> RawPanel {
        let rows = (0..40)
            .map(|i| PanelRow {
                county_fips: format!("{:05}", 19000 + i),
                year: 2008,
                values: vec![
                    Some(if i < 20 { 120.0 + i as f64 } else { 180.0 + i as f64 }),
                    Some(if i < 20 { 50.0 } else { 90.0 }),
                    if i % 10 == 0 { None } else { Some(i as f64) },
                ],
            })
            .collect();
        RawPanel::new(vec!["Yield".into(), "Soil_WA".into(), "RF_Jul".into()], rows).unwrap()
    }

    fn plan() -> CatalogPlan {
        let mut p = CatalogPlan::new("Yield");
        p.target_edges = Some(vec![131.0, 178.0]);
        p
    }

    #[test]
    fn builds_catalog_and_preserves_rows() {
        let p = panel();
        let cat = build_catalog(&p, &plan()).unwrap();
        assert_eq!(cat.target().name, "Yield");
        assert_eq!(cat.target().bins.bin_count(), 3);
        let soil = cat.by_name("Soil_WA").unwrap();
        assert_eq!(soil.bins.bin_count(), 2);
        let data = DiscretizedDataset::from_panel(&p, &cat).unwrap();
        assert_eq!(data.len(), p.len());
        assert_eq!(data.rows()[0].bins[2], None);
        assert!(data.missing_fraction() > 0.0);
    }

    #[test]
    fn empty_target_bin_is_reported() {
        let p = panel();
        let mut pl = plan();
        pl.target_edges = Some(vec![131.0, 149.0, 178.0]);
        match build_catalog(&p, &pl) {
            Err(PipelineError::InColumn { column, source }) => {
                assert_eq!(column, "Yield");
                assert!(matches!(*source, PipelineError::EmptyBin { bin: 2, .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_and_sidecar_round_trip() {
        let p = panel();
        let cat = build_catalog(&p, &plan()).unwrap();
        let data = DiscretizedDataset::from_panel(&p, &cat).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let sidecar = serde_json::to_string(&SchemeSidecar::from_catalog(&cat)).unwrap();
        let cat2 = serde_json::from_str::<SchemeSidecar>(&sidecar)
            .unwrap()
            .into_catalog()
            .unwrap();
        assert_eq!(cat2, cat);
        let back = DiscretizedDataset::read_csv(buf.as_slice(), &cat2).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn out_of_range_bins_rejected() {
        let cat = build_catalog(&panel(), &plan()).unwrap();
        let row = DiscreteRow {
            county_fips: "x".into(),
            year: 1,
            bins: vec![Some(3), None, None],
        };
        assert!(DiscretizedDataset::new(cat, vec![row]).is_err());
    }
}

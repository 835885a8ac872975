//! Delimited-text ingestion: header required, categorical columns expanded
//! to dummy indicators, optional standardization, train/test splitting.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(thiserror::Error, Debug)]
pub enum DataError {
    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{count} missing cell(s); rows with missing values are not accepted")]
    MissingValues { count: usize },

    #[error("row {row}, column `{column}`: {msg}")]
    Parse { row: usize, column: String, msg: String },

    #[error("{0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// A parsed delimited file: header plus string cells, all rows equally wide
/// (the reader rejects ragged rows).
#[derive(Debug, Clone)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read(path: &Path) -> Result<RawTable> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut seen = BTreeSet::new();
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(DataError::Shape(format!("duplicate column `{name}` in header")));
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            rows.push(record?.iter().map(str::to_string).collect());
        }
        Ok(RawTable { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::Shape(format!("column `{name}` not found in header")))
    }

    /// New table containing only the given row indices, in the given order.
    pub fn subset(&self, rows: &[usize]) -> RawTable {
        RawTable {
            header: self.header.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "N/A" | "NaN" | "nan" | "na")
}

fn reject_missing(table: &RawTable) -> Result<()> {
    let count = table.rows.iter().flatten().filter(|c| is_missing(c)).count();
    if count > 0 {
        return Err(DataError::MissingValues { count });
    }
    Ok(())
}

/// How one original column maps onto the design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// Observed levels, sorted; the first is the baseline and gets no
    /// indicator column.
    Categorical { levels: Vec<String> },
}

/// Standardization fitted on the training rows. `x_mean`/`x_scale` align
/// with the expanded covariate columns; the scale is sd·√n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub y_mean: f64,
    pub y_scale: f64,
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
}

/// Everything needed to map new rows of the same file format onto the
/// covariate columns the sampler was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSchema {
    pub response: String,
    /// Original covariate columns in file order with their parsed kind.
    pub columns: Vec<(String, ColumnKind)>,
    pub scaling: Option<Scaling>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<f64>,
    /// Expanded covariate labels: numeric columns keep their name,
    /// categorical levels become `{column}_{level}`.
    pub labels: Vec<String>,
    /// Column-major, aligned with `labels`.
    pub cols: Vec<Vec<f64>>,
    pub schema: DataSchema,
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| DataError::Parse {
        row: row + 1,
        column: column.to_string(),
        msg: format!("`{cell}` is not a number"),
    })
}

fn infer_kind(table: &RawTable, col: usize) -> ColumnKind {
    if table.rows.iter().all(|r| r[col].parse::<f64>().is_ok()) {
        ColumnKind::Numeric
    } else {
        let levels: BTreeSet<&str> = table.rows.iter().map(|r| r[col].as_str()).collect();
        ColumnKind::Categorical { levels: levels.into_iter().map(str::to_string).collect() }
    }
}

/// Expand a table against a fixed schema. Numeric cells must parse;
/// categorical cells must be levels observed at schema-build time.
/// Returns unscaled columns; apply `schema.scaling` separately.
pub fn apply_schema(table: &RawTable, schema: &DataSchema) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    reject_missing(table)?;
    let mut labels = Vec::new();
    let mut cols = Vec::new();
    for (name, kind) in &schema.columns {
        let j = table.column_index(name)?;
        match kind {
            ColumnKind::Numeric => {
                let col = table
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| parse_cell(&r[j], i, name))
                    .collect::<Result<Vec<f64>>>()?;
                labels.push(name.clone());
                cols.push(col);
            }
            ColumnKind::Categorical { levels } => {
                for (i, r) in table.rows.iter().enumerate() {
                    if !levels.iter().any(|l| l == &r[j]) {
                        return Err(DataError::Parse {
                            row: i + 1,
                            column: name.clone(),
                            msg: format!("unknown level `{}`", r[j]),
                        });
                    }
                }
                for level in &levels[1..] {
                    labels.push(format!("{name}_{level}"));
                    cols.push(
                        table
                            .rows
                            .iter()
                            .map(|r| if &r[j] == level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                }
            }
        }
    }
    Ok((labels, cols))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() < 2 {
        0.0
    } else {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    };
    (mean, var.sqrt())
}

pub fn apply_scaling(cols: &mut [Vec<f64>], scaling: &Scaling) {
    for (j, col) in cols.iter_mut().enumerate() {
        for x in col.iter_mut() {
            *x = (*x - scaling.x_mean[j]) / scaling.x_scale[j];
        }
    }
}

/// Parse the response column of `table` if present (prediction files may
/// omit it). Always on the original, unscaled scale.
pub fn response_column(table: &RawTable, schema: &DataSchema) -> Result<Option<Vec<f64>>> {
    let Some(j) = table.header.iter().position(|h| h == &schema.response) else {
        return Ok(None);
    };
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_cell(&r[j], i, &schema.response).map(Some))
        .collect()
}

/// Build a dataset from training rows: infer column kinds, expand dummies,
/// and optionally standardize (y centered and scaled by its sd; each design
/// column centered and scaled by sd·√n).
pub fn load_dataset(table: &RawTable, response: &str, scale: bool) -> Result<Dataset> {
    reject_missing(table)?;
    if table.rows.is_empty() {
        return Err(DataError::Shape("no data rows".into()));
    }
    let resp_idx = table.column_index(response)?;
    let mut y: Vec<f64> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_cell(&r[resp_idx], i, response))
        .collect::<Result<_>>()?;

    let columns: Vec<(String, ColumnKind)> = table
        .header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != resp_idx)
        .map(|(j, name)| (name.clone(), infer_kind(table, j)))
        .collect();
    let mut schema = DataSchema { response: response.to_string(), columns, scaling: None };
    let (labels, mut cols) = apply_schema(table, &schema)?;

    if scale {
        let n = y.len() as f64;
        let (y_mean, y_scale) = mean_sd(&y);
        if y_scale == 0.0 {
            return Err(DataError::Shape("response has zero variance, cannot scale".into()));
        }
        let mut x_mean = Vec::with_capacity(cols.len());
        let mut x_scale = Vec::with_capacity(cols.len());
        for (label, col) in labels.iter().zip(&cols) {
            let (m, sd) = mean_sd(col);
            if sd == 0.0 {
                return Err(DataError::Shape(format!(
                    "column `{label}` has zero variance, cannot scale"
                )));
            }
            x_mean.push(m);
            x_scale.push(sd * n.sqrt());
        }
        let scaling = Scaling { y_mean, y_scale, x_mean, x_scale };
        for v in y.iter_mut() {
            *v = (*v - scaling.y_mean) / scaling.y_scale;
        }
        apply_scaling(&mut cols, &scaling);
        schema.scaling = Some(scaling);
    }

    Ok(Dataset { y, labels, cols, schema })
}

/// Held-out row selection: an explicit 1-based inclusive range, or a
/// fraction drawn without replacement from a seeded shuffle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    Rows { start: usize, end: usize },
    Fraction(f64),
}

impl std::str::FromStr for SplitSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some((a, b)) = s.split_once("..") {
            let start: usize = a.trim().parse().map_err(|_| format!("bad row `{a}`"))?;
            let end: usize = b.trim().parse().map_err(|_| format!("bad row `{b}`"))?;
            if start == 0 || end < start {
                return Err(format!("`{s}` is not a 1-based inclusive range"));
            }
            return Ok(SplitSpec::Rows { start, end });
        }
        let f: f64 = s.parse().map_err(|_| format!("`{s}` is neither `a..b` nor a fraction"))?;
        if !(0.0..1.0).contains(&f) || f == 0.0 {
            return Err(format!("fraction must be in (0, 1), got {f}"));
        }
        Ok(SplitSpec::Fraction(f))
    }
}

/// Split `n` row indices into (train, test), both ascending.
pub fn split_rows(n: usize, spec: SplitSpec, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let test: Vec<usize> = match spec {
        SplitSpec::Rows { start, end } => {
            if end > n {
                return Err(DataError::Shape(format!(
                    "test rows {start}..{end} exceed the {n} data rows"
                )));
            }
            (start - 1..end).collect()
        }
        SplitSpec::Fraction(f) => {
            use rand::seq::SliceRandom;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut bgnlm::rng::master_rng(seed));
            let k = ((f * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
            let mut test: Vec<usize> = order.into_iter().take(k).collect();
            test.sort_unstable();
            test
        }
    };
    let train: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
    if train.is_empty() {
        return Err(DataError::Shape("no training rows left after the split".into()));
    }
    Ok((train, test))
}

// SPDX-License-Identifier: Apache-2.0

//! Dataset ingestion, standardization and prediction designs.
//!
//! Every posterior and every summary in this crate works on the standardized
//! scale: each predictor column and the response are centered to mean zero
//! and scaled to unit sample variance (denominator `n - 1`). The per-column
//! center/scale pairs are kept so coefficients can be reported on the raw
//! scale.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DssError, Result};
use crate::linalg;

/// Center/scale pairs for every predictor and the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub x_center: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub y_center: f64,
    pub y_scale: f64,
}

impl Standardization {
    fn identity(p: usize) -> Self {
        Standardization {
            x_center: vec![0.0; p],
            x_scale: vec![1.0; p],
            y_center: 0.0,
            y_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    names: Vec<String>,
    response: String,
    standardization: Standardization,
    standardized: bool,
}

/// Load-time directives for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Response column; the last column when `None`.
    pub response: Option<String>,
    /// Columns to replace by their natural logarithm before standardizing.
    pub log_columns: Vec<String>,
    /// Skip centering and scaling.
    pub no_standardize: bool,
}

impl Dataset {
    /// Builds a standardized dataset from raw inputs.
    pub fn standardize(
        raw_x: DMatrix<f64>,
        raw_y: DVector<f64>,
        names: Vec<String>,
        response: impl Into<String>,
    ) -> Result<Self> {
        validate_shape(&raw_x, &raw_y, &names)?;
        let (n, p) = raw_x.shape();
        let mut x = raw_x;
        let mut st = Standardization::identity(p);
        for j in 0..p {
            let col: Vec<f64> = x.column(j).iter().copied().collect();
            let (center, scale) = center_scale(&col)
                .ok_or_else(|| DssError::Degenerate(format!("column '{}' is constant", names[j])))?;
            st.x_center[j] = center;
            st.x_scale[j] = scale;
            for i in 0..n {
                x[(i, j)] = (x[(i, j)] - center) / scale;
            }
        }
        let ys: Vec<f64> = raw_y.iter().copied().collect();
        let (yc, ysd) = center_scale(&ys)
            .ok_or_else(|| DssError::Degenerate("response is constant".into()))?;
        st.y_center = yc;
        st.y_scale = ysd;
        let y = raw_y.map(|v| (v - yc) / ysd);
        Ok(Dataset {
            x,
            y,
            names,
            response: response.into(),
            standardization: st,
            standardized: true,
        })
    }

    /// Wraps raw inputs without transforming them. Constant columns are
    /// still rejected.
    pub fn unstandardized(
        x: DMatrix<f64>,
        y: DVector<f64>,
        names: Vec<String>,
        response: impl Into<String>,
    ) -> Result<Self> {
        validate_shape(&x, &y, &names)?;
        for j in 0..x.ncols() {
            let col: Vec<f64> = x.column(j).iter().copied().collect();
            if center_scale(&col).is_none() {
                return Err(DssError::Degenerate(format!("column '{}' is constant", names[j])));
            }
        }
        let p = x.ncols();
        Ok(Dataset {
            x,
            y,
            names,
            response: response.into(),
            standardization: Standardization::identity(p),
            standardized: false,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response_name(&self) -> &str {
        &self.response
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Recovers the raw `(X, Y)` the dataset was built from.
    pub fn unstandardize(&self) -> (DMatrix<f64>, DVector<f64>) {
        let st = &self.standardization;
        let mut x = self.x.clone();
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                x[(i, j)] = x[(i, j)] * st.x_scale[j] + st.x_center[j];
            }
        }
        let y = self.y.map(|v| v * st.y_scale + st.y_center);
        (x, y)
    }

    /// Applies this dataset's standardization to raw prediction rows.
    pub fn standardize_rows(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.p() {
            return Err(DssError::Schema(format!(
                "prediction rows have {} columns, dataset has {}",
                raw.ncols(),
                self.p()
            )));
        }
        let st = &self.standardization;
        let mut x = raw.clone();
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                x[(i, j)] = (x[(i, j)] - st.x_center[j]) / st.x_scale[j];
            }
        }
        Ok(x)
    }

    /// Maps standardized-scale coefficients to `(intercept, slopes)` on the
    /// raw scale.
    pub fn raw_coefficients(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let st = &self.standardization;
        let slopes: Vec<f64> = beta
            .iter()
            .enumerate()
            .map(|(j, b)| b * st.y_scale / st.x_scale[j])
            .collect();
        let intercept = st.y_center
            - slopes
                .iter()
                .zip(&st.x_center)
                .map(|(b, c)| b * c)
                .sum::<f64>();
        (intercept, slopes)
    }

    /// In-sample R² of the least-squares fit on `support` (with intercept).
    pub fn refit_r_squared(&self, support: &[usize]) -> Result<f64> {
        let yc = center(&self.y);
        let tss = yc.norm_squared();
        if support.is_empty() {
            return Ok(0.0);
        }
        let mut xs = self.x.select_columns(support);
        for j in 0..xs.ncols() {
            let m = xs.column(j).mean();
            xs.column_mut(j).add_scalar_mut(-m);
        }
        let coef = linalg::least_squares(&xs, &yc)?;
        let rss = (&yc - &xs * coef).norm_squared();
        Ok(1.0 - rss / tss)
    }
}

fn center(v: &DVector<f64>) -> DVector<f64> {
    let m = v.mean();
    v.map(|x| x - m)
}

fn validate_shape(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<()> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(DssError::Degenerate(format!("need at least 2 observations, got {n}")));
    }
    if p < 1 {
        return Err(DssError::Degenerate("need at least one predictor".into()));
    }
    if y.len() != n {
        return Err(DssError::Schema(format!(
            "response has {} entries but X has {n} rows",
            y.len()
        )));
    }
    if names.len() != p {
        return Err(DssError::Schema(format!(
            "{} names supplied for {p} predictors",
            names.len()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(DssError::Degenerate("non-finite entry in data".into()));
    }
    Ok(())
}

/// Mean and sample standard deviation (n - 1), or `None` for a constant
/// vector.
fn center_scale(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len() as f64;
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return None;
    }
    let mean = linalg::neumaier_sum(values.iter().copied()) / n;
    let ss = linalg::neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let sd = (ss / (n - 1.0)).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return None;
    }
    Some((mean, sd))
}

/// Reads a CSV file with a header row into a [`Dataset`].
pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_csv(file, opts)
}

/// Same as [`load_csv`] for an arbitrary reader.
pub fn read_csv<R: std::io::Read>(reader: R, opts: &LoadOptions) -> Result<Dataset> {
    let (headers, rows) = read_table(reader, &opts.log_columns)?;
    let response = opts
        .response
        .clone()
        .unwrap_or_else(|| headers[headers.len() - 1].clone());
    let resp_idx = headers
        .iter()
        .position(|h| *h == response)
        .ok_or_else(|| DssError::Schema(format!("response column '{response}' not found")))?;

    let n = rows.len();
    let pred_idx: Vec<usize> = (0..headers.len()).filter(|&c| c != resp_idx).collect();
    let names: Vec<String> = pred_idx.iter().map(|&c| headers[c].clone()).collect();
    let x = DMatrix::from_fn(n, pred_idx.len(), |i, j| rows[i][pred_idx[j]]);
    let y = DVector::from_fn(n, |i, _| rows[i][resp_idx]);
    if opts.no_standardize {
        Dataset::unstandardized(x, y, names, response)
    } else {
        Dataset::standardize(x, y, names, response)
    }
}

/// Reads a numeric CSV with no designated response: every column is a
/// variable. Returns the column names and the raw `n × p` matrix.
pub fn load_matrix_csv(path: impl AsRef<Path>, log_columns: &[String]) -> Result<(Vec<String>, DMatrix<f64>)> {
    let file = std::fs::File::open(path.as_ref())?;
    let (headers, rows) = read_table(file, log_columns)?;
    if rows.is_empty() {
        return Err(DssError::Degenerate("table has no rows".into()));
    }
    let x = DMatrix::from_fn(rows.len(), headers.len(), |i, j| rows[i][j]);
    Ok((headers, x))
}

/// Header and numeric rows of a CSV, with optional log directives.
fn read_table<R: std::io::Read>(reader: R, log_columns: &[String]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(DssError::Schema("header row is empty".into()));
    }
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(DssError::Schema(format!("duplicate column '{h}'")));
        }
    }
    let mut log_idx = Vec::with_capacity(log_columns.len());
    for name in log_columns {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DssError::Schema(format!("log column '{name}' not found")))?;
        log_idx.push(idx);
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        if record.len() != headers.len() {
            return Err(DssError::Schema(format!(
                "row {row_no} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len());
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(DssError::Parse {
                    row: row_no,
                    column: headers[c].clone(),
                    message: "missing value".into(),
                });
            }
            let mut v: f64 = cell.parse().map_err(|_| DssError::Parse {
                row: row_no,
                column: headers[c].clone(),
                message: format!("'{cell}' is not numeric"),
            })?;
            if log_idx.contains(&c) {
                if v <= 0.0 {
                    return Err(DssError::Parse {
                        row: row_no,
                        column: headers[c].clone(),
                        message: format!("cannot log-transform non-positive value {v}"),
                    });
                }
                v = v.ln();
            }
            if !v.is_finite() {
                return Err(DssError::Parse {
                    row: row_no,
                    column: headers[c].clone(),
                    message: "non-finite value".into(),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

/// Where the prediction points of a [`PredictionDesign`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignProvenance {
    SameAsTraining,
    UserSupplied,
    Augmented,
}

/// Matrix of prediction points at which sparsified predictors are judged.
#[derive(Debug, Clone)]
pub struct PredictionDesign {
    x: DMatrix<f64>,
    provenance: DesignProvenance,
    rank: usize,
}

impl PredictionDesign {
    pub fn new(x: DMatrix<f64>, provenance: DesignProvenance) -> Result<Self> {
        if x.nrows() < 1 || x.ncols() < 1 {
            return Err(DssError::Argument("prediction design is empty".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DssError::Argument("non-finite entry in prediction design".into()));
        }
        let rank = linalg::numerical_rank(&x);
        Ok(PredictionDesign { x, provenance, rank })
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        let x = data.x().clone();
        let rank = linalg::numerical_rank(&x);
        PredictionDesign {
            x,
            provenance: DesignProvenance::SameAsTraining,
            rank,
        }
    }

    /// Raw-scale prediction rows, standardized with the dataset's metadata.
    pub fn user_supplied(data: &Dataset, raw_rows: &DMatrix<f64>) -> Result<Self> {
        let x = data.standardize_rows(raw_rows)?;
        Self::new(x, DesignProvenance::UserSupplied)
    }

    /// Training rows followed by extra raw-scale rows.
    pub fn augmented(data: &Dataset, extra_raw_rows: &DMatrix<f64>) -> Result<Self> {
        let extra = data.standardize_rows(extra_raw_rows)?;
        let n = data.n();
        let p = data.p();
        let m = extra.nrows();
        let x = DMatrix::from_fn(n + m, p, |i, j| {
            if i < n {
                data.x()[(i, j)]
            } else {
                extra[(i - n, j)]
            }
        });
        Self::new(x, DesignProvenance::Augmented)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn provenance(&self) -> DesignProvenance {
        self.provenance
    }

    /// Numerical rank, recorded at construction.
    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Seed and stream id for a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RngConfig {
    pub seed: u64,
    pub stream: u64,
}

impl RngConfig {
    pub fn new(seed: u64) -> Self {
        RngConfig { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RngConfig { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

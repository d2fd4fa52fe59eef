//! Word-indicator regression of score differences.
//!
//! Each analyzed document is one row. The first column is an intercept and
//! every vocabulary word contributes one feature column (presence indicator
//! by default, raw counts on request). The response is the per-document
//! score difference. Coefficients come from a Householder least-squares solve
//! and are reported with classical standard errors, t statistics, two-sided
//! p-values and Benjamini–Hochberg adjusted p-values.

mod bh;
mod dist;
mod qr;

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::scorer::ScorePair;
use crate::tokenize::count_text;

pub use bh::bh_adjust;
pub use dist::{betainc, ln_gamma, student_t_sf, two_sided_p};
pub use qr::{least_squares, LeastSquares, DEFAULT_RANK_TOL};

pub const INTERCEPT: &str = "(intercept)";

#[derive(Debug, Error, PartialEq)]
pub enum RegressError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("row mismatch: {0}")]
    RowMismatch(String),
    #[error("underdetermined: {rows} rows for {columns} retained columns")]
    Underdetermined { rows: usize, columns: usize },
    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDf(u64),
    #[error("p-value {0} outside [0, 1]")]
    PValueOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, RegressError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    #[default]
    Presence,
    Counts,
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "presence" => Ok(Self::Presence),
            "counts" => Ok(Self::Counts),
            other => Err(format!("unknown feature mode {other:?} (expected presence|counts)")),
        }
    }
}

/// Column-major regression design with its response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    labels: Vec<String>,
    row_ids: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
}

impl DesignMatrix {
    /// Assemble from explicit columns. `labels[0]` names the first column.
    pub fn from_columns(labels: Vec<String>, columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(RegressError::RowMismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != response.len()) {
            return Err(RegressError::RowMismatch(format!(
                "column of length {} for {} responses",
                bad.len(),
                response.len()
            )));
        }
        let row_ids = (0..response.len()).map(|i| i.to_string()).collect();
        Ok(Self {
            labels,
            row_ids,
            columns,
            response,
        })
    }

    /// Intercept plus the given feature columns.
    pub fn with_intercept(features: Vec<(String, Vec<f64>)>, response: Vec<f64>) -> Result<Self> {
        let mut labels = vec![INTERCEPT.to_string()];
        let mut columns = vec![vec![1.0; response.len()]];
        for (label, col) in features {
            labels.push(label);
            columns.push(col);
        }
        Self::from_columns(labels, columns, response)
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Copy with the response multiplied by `c`.
    pub fn scaled_response(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.response.iter_mut().for_each(|y| *y *= c);
        out
    }
}

/// Build the word-feature design for `pairs`, looking documents up by id.
pub fn build_design(
    pairs: &[ScorePair],
    docs: &[Document],
    vocabulary: &[String],
    mode: FeatureMode,
) -> Result<DesignMatrix> {
    if vocabulary.is_empty() {
        return Err(RegressError::EmptyVocabulary);
    }
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
    let n = pairs.len();
    let mut columns = vec![vec![0.0; n]; vocabulary.len()];
    let mut row_ids = Vec::with_capacity(n);
    for (row, pair) in pairs.iter().enumerate() {
        let doc = by_id
            .get(pair.doc_id.as_str())
            .ok_or_else(|| RegressError::RowMismatch(format!("no document with id {:?}", pair.doc_id)))?;
        let counts = count_text(&doc.text);
        for (col, word) in columns.iter_mut().zip(vocabulary) {
            let c = counts.get(word);
            col[row] = match mode {
                FeatureMode::Presence => f64::from(u8::from(c > 0)),
                FeatureMode::Counts => c as f64,
            };
        }
        row_ids.push(pair.doc_id.clone());
    }
    let features = vocabulary.iter().cloned().zip(columns).collect();
    let response = pairs.iter().map(|p| p.difference).collect();
    let mut design = DesignMatrix::with_intercept(features, response)?;
    design.row_ids = row_ids;
    Ok(design)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// Residual sum of squares is numerically zero: se = 0 and p = 0 by convention.
    ExactFit,
    /// All responses identical: intercept = mean, every word p = 1 by convention.
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub label: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    /// Benjamini–Hochberg adjusted p over the retained word columns.
    pub p_bh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// Retained columns in design order; the intercept comes first.
    pub coefficients: Vec<Coefficient>,
    pub dropped_columns: Vec<String>,
    pub rows: usize,
    pub degrees_of_freedom: u64,
    pub residual_variance: f64,
    pub r_squared: f64,
    pub status: FitStatus,
}

impl RegressionResult {
    /// Retained word coefficients (intercept excluded).
    pub fn words(&self) -> impl Iterator<Item = &Coefficient> {
        self.coefficients.iter().filter(|c| c.label != INTERCEPT)
    }

    pub fn coefficient(&self, label: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.label == label)
    }

    pub fn exact_fit(&self) -> bool {
        self.status == FitStatus::ExactFit
    }

    /// CSV with columns word, coefficient, std_error, t, p, p_bh, dropped.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["word", "coefficient", "std_error", "t", "p", "p_bh", "dropped"])?;
        for c in &self.coefficients {
            out.write_record([
                c.label.clone(),
                fmt_f64(c.coefficient),
                fmt_f64(c.std_error),
                fmt_f64(c.t_statistic),
                fmt_f64(c.p_value),
                c.p_bh.map(fmt_f64).unwrap_or_default(),
                "false".to_string(),
            ])?;
        }
        for d in &self.dropped_columns {
            out.write_record([d.as_str(), "", "", "", "", "", "true"])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Ordinary least squares with classical inference on every retained column.
pub fn ols_fit(x: &DesignMatrix) -> Result<RegressionResult> {
    let y = x.response();
    let rows = y.len();
    let ls = least_squares(&x.columns, y, DEFAULT_RANK_TOL);
    let retained = ls.kept.len();
    if rows <= retained || retained == 0 {
        return Err(RegressError::Underdetermined {
            rows,
            columns: retained,
        });
    }
    let df = (rows - retained) as u64;

    let mut fitted = vec![0.0; rows];
    for (&j, &b) in ls.kept.iter().zip(&ls.beta) {
        for (f, xv) in fitted.iter_mut().zip(x.column(j)) {
            *f += b * xv;
        }
    }
    let ssr: f64 = y.iter().zip(&fitted).map(|(yi, fi)| (yi - fi).powi(2)).sum();
    let mean = y.iter().sum::<f64>() / rows as f64;
    let sst: f64 = y.iter().map(|yi| (yi - mean).powi(2)).sum();
    let y_norm2: f64 = y.iter().map(|v| v * v).sum();

    let zero_variance = y.iter().all(|&v| v == y[0]);
    let exact = !zero_variance && ssr <= EXACT_FIT_REL * EXACT_FIT_REL * y_norm2;
    let status = if zero_variance {
        FitStatus::ZeroVariance
    } else if exact {
        FitStatus::ExactFit
    } else {
        FitStatus::Ok
    };
    let residual_variance = if status == FitStatus::Ok { ssr / df as f64 } else { 0.0 };
    let r_squared = match status {
        FitStatus::Ok => (1.0 - ssr / sst).clamp(0.0, 1.0),
        FitStatus::ExactFit => 1.0,
        FitStatus::ZeroVariance => 0.0,
    };

    let mut coefficients = Vec::with_capacity(retained);
    for (pos, &j) in ls.kept.iter().enumerate() {
        let label = x.labels()[j].clone();
        let is_intercept = label == INTERCEPT;
        let (coefficient, std_error, t_statistic, p_value) = match status {
            FitStatus::Ok => {
                let b = ls.beta[pos];
                let se = (residual_variance * ls.inv_gram_diag[pos]).sqrt();
                let t = b / se;
                (b, se, t, two_sided_p(t, df)?)
            }
            FitStatus::ExactFit => {
                let b = ls.beta[pos];
                (b, 0.0, exact_t(b), 0.0)
            }
            FitStatus::ZeroVariance if is_intercept => (mean, 0.0, exact_t(mean), if mean == 0.0 { 1.0 } else { 0.0 }),
            FitStatus::ZeroVariance => (0.0, 0.0, 0.0, 1.0),
        };
        coefficients.push(Coefficient {
            label,
            coefficient,
            std_error,
            t_statistic,
            p_value,
            p_bh: None,
        });
    }

    let word_idx: Vec<usize> = (0..coefficients.len())
        .filter(|&i| coefficients[i].label != INTERCEPT)
        .collect();
    let word_p: Vec<f64> = word_idx.iter().map(|&i| coefficients[i].p_value).collect();
    for (&i, adj) in word_idx.iter().zip(bh_adjust(&word_p)?) {
        coefficients[i].p_bh = Some(adj);
    }

    Ok(RegressionResult {
        coefficients,
        dropped_columns: ls.dropped.iter().map(|&j| x.labels()[j].clone()).collect(),
        rows,
        degrees_of_freedom: df,
        residual_variance,
        r_squared,
        status,
    })
}

/// Relative residual norm below which a fit counts as exact.
const EXACT_FIT_REL: f64 = 1e-12;

fn exact_t(b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(b)
    }
}

//! Result rows and their CSV form.
//!
//! Columns, in order:
//!
//! ```text
//! experiment, variant, trial, iteration, cumulative_shots, theta_0 … theta_{m−1},
//! estimate_value, mse_bound, ci_radius_k2, exact_f, temperature, accepted, mse_target
//! ```
//!
//! `temperature` and `accepted` are empty for gradient descent. Floats use
//! the shortest representation that round-trips.

use std::path::{Path, PathBuf};

use shotfrugal_core::estimators::confidence_interval;
use shotfrugal_core::TraceRow64;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: String,
    pub variant: String,
    pub trial: u64,
    pub iteration: usize,
    pub cumulative_shots: u64,
    pub theta: Vec<f64>,
    pub estimate_value: f64,
    pub mse_bound: f64,
    pub ci_radius_k2: f64,
    pub exact_f: f64,
    pub temperature: Option<f64>,
    pub accepted: Option<bool>,
    pub mse_target: f64,
}

impl Record {
    pub fn from_trace(experiment: &str, variant: &str, trial: u64, row: &TraceRow64) -> Self {
        Self {
            experiment: experiment.to_string(),
            variant: variant.to_string(),
            trial,
            iteration: row.iteration,
            cumulative_shots: row.cumulative_shots,
            theta: row.theta.clone(),
            estimate_value: row.estimate.value(),
            mse_bound: row.estimate.mse_bound(),
            ci_radius_k2: confidence_interval(&row.estimate, 2.0).radius,
            exact_f: row.exact_f,
            temperature: row.temperature,
            accepted: row.accepted,
            mse_target: row.mse_target,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            self.experiment.clone(),
            self.variant.clone(),
            self.trial.to_string(),
            self.iteration.to_string(),
            self.cumulative_shots.to_string(),
        ];
        out.extend(self.theta.iter().map(f64::to_string));
        out.extend([
            self.estimate_value.to_string(),
            self.mse_bound.to_string(),
            self.ci_radius_k2.to_string(),
            self.exact_f.to_string(),
            self.temperature.map(|t| t.to_string()).unwrap_or_default(),
            self.accepted.map(|a| a.to_string()).unwrap_or_default(),
            self.mse_target.to_string(),
        ]);
        out
    }
}

pub fn header(num_params: usize) -> Vec<String> {
    let mut h: Vec<String> = ["experiment", "variant", "trial", "iteration", "cumulative_shots"]
        .map(String::from)
        .to_vec();
    h.extend((0..num_params).map(|k| format!("theta_{k}")));
    h.extend(
        [
            "estimate_value",
            "mse_bound",
            "ci_radius_k2",
            "exact_f",
            "temperature",
            "accepted",
            "mse_target",
        ]
        .map(String::from),
    );
    h
}

/// Rows of one variant, ordered by `(trial, iteration)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantTable {
    pub variant: String,
    pub num_params: usize,
    pub rows: Vec<Record>,
}

impl VariantTable {
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| (r.trial, r.iteration));
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |source| HarnessError::Csv {
            path: PathBuf::from(format!("<{}>", self.variant)),
            source,
        };
        w.write_record(header(self.num_params)).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.fields()).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::io(format!("<{}>", self.variant), e.into_error()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_bytes()?).map_err(|e| HarnessError::io(path, e))
    }
}

/// A CSV file read back as named columns of strings.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let csv_err = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    pub fn column(&self, name: &str, kind: &'static str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::MissingColumn {
                path: self.path.clone(),
                column: name.to_string(),
                kind,
            })
    }

    /// Parse cell `col` of row `row`; empty cells read as `None`.
    pub fn num(&self, row: usize, col: usize) -> Result<Option<f64>> {
        let cell = &self.rows[row][col];
        if cell.is_empty() {
            return Ok(None);
        }
        cell.parse().map(Some).map_err(|_| {
            HarnessError::Plot(format!(
                "{}: row {}: column {:?}: not a number: {cell:?}",
                self.path.display(),
                row + 2,
                self.headers[col]
            ))
        })
    }
}

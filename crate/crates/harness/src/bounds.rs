//! Per-iteration Monte Carlo checks of the MSE and confidence bounds.
//!
//! For each iteration the ensemble gives `n` errors `e = f̂ − f`. The checks:
//!
//! - MSE: the empirical `mean(e²)` may exceed the mean bound `B² + A²` by at
//!   most `MSE_Z` standard errors of that mean. Where the bound is tight (the
//!   sample-mean bound is exact at outcomes with zero mean) the empirical
//!   value sits on the bound and a strict comparison would fail half the
//!   time by chance.
//! - CI: the share of trials with `|e| > κ√A² + B` is at most `2e^{−κ²/2}`.
//! - Bias (unbiased estimators only): `|mean(e)|` within `BIAS_Z` standard
//!   errors of 0.

use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const MSE_Z: f64 = 3.0;
pub const BIAS_Z: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub iteration: usize,
    pub error: f64,
    pub mse_bound: f64,
    pub ci_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub variant: String,
    pub iteration: usize,
    pub trials: usize,
    pub empirical_mse: f64,
    pub empirical_mse_se: f64,
    pub mean_mse_bound: f64,
    pub mse_within_bound: bool,
    pub mse_ok: bool,
    pub kappa: f64,
    pub violation_rate: f64,
    pub tail_bound: f64,
    pub ci_ok: bool,
    pub mean_error: f64,
    pub mean_error_se: f64,
    /// Empty when the estimator is not expected to be unbiased.
    pub bias_ok: Option<bool>,
}

impl BoundRow {
    pub fn passed(&self) -> bool {
        self.mse_ok && self.ci_ok && self.bias_ok.unwrap_or(true)
    }

    pub fn describe(&self) -> String {
        format!(
            "{} iteration {}: mse {:.3e} (±{:.1e}) vs bound {:.3e}; ci violations {:.4} vs {:.4}; mean error {:+.2e} (±{:.1e})",
            self.variant,
            self.iteration,
            self.empirical_mse,
            self.empirical_mse_se,
            self.mean_mse_bound,
            self.violation_rate,
            self.tail_bound,
            self.mean_error,
            self.mean_error_se
        )
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Group `samples` by iteration and evaluate the checks at each one.
pub fn summarize(
    variant: &str,
    samples: &[&ErrorSample],
    kappa: f64,
    unbiased: bool,
) -> Vec<BoundRow> {
    let max_iter = samples.iter().map(|s| s.iteration).max();
    let Some(max_iter) = max_iter else {
        return Vec::new();
    };
    let tail_bound = 2.0 * (-kappa * kappa / 2.0).exp();
    let mut out = Vec::new();
    for it in 0..=max_iter {
        let group: Vec<&ErrorSample> = samples
            .iter()
            .copied()
            .filter(|s| s.iteration == it)
            .collect();
        if group.is_empty() {
            continue;
        }
        let n = group.len();
        let sq: Vec<f64> = group.iter().map(|s| s.error * s.error).collect();
        let (empirical_mse, empirical_mse_se) = mean_and_se(&sq);
        let mean_mse_bound = group.iter().map(|s| s.mse_bound).sum::<f64>() / n as f64;
        let errors: Vec<f64> = group.iter().map(|s| s.error).collect();
        let (mean_error, mean_error_se) = mean_and_se(&errors);
        let violations = group.iter().filter(|s| s.error.abs() > s.ci_radius).count();
        let violation_rate = violations as f64 / n as f64;
        let slack = if empirical_mse_se.is_finite() {
            MSE_Z * empirical_mse_se
        } else {
            0.0
        };
        out.push(BoundRow {
            variant: variant.to_string(),
            iteration: it,
            trials: n,
            empirical_mse,
            empirical_mse_se,
            mean_mse_bound,
            mse_within_bound: empirical_mse <= mean_mse_bound,
            mse_ok: empirical_mse <= mean_mse_bound + slack,
            kappa,
            violation_rate,
            tail_bound,
            ci_ok: violation_rate <= tail_bound,
            mean_error,
            mean_error_se,
            bias_ok: unbiased.then(|| mean_error.abs() <= BIAS_Z * mean_error_se),
        });
    }
    out
}

pub fn write_summary(path: &Path, rows: &[BoundRow]) -> Result<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(iteration: usize, error: f64) -> ErrorSample {
        ErrorSample {
            iteration,
            error,
            mse_bound: 1.0,
            ci_radius: 1.5,
        }
    }

    #[test]
    fn groups_by_iteration() {
        let s = [sample(0, 0.5), sample(0, -0.5), sample(1, 2.0), sample(1, -2.0)];
        let refs: Vec<&ErrorSample> = s.iter().collect();
        let rows = summarize("v", &refs, 2.0, true);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].empirical_mse, 0.25);
        assert!(rows[0].passed());
        assert_eq!(rows[1].violation_rate, 1.0);
        assert!(!rows[1].ci_ok);
        assert!(!rows[1].mse_within_bound);
        assert_eq!(rows[1].mean_error, 0.0);
    }

    #[test]
    fn tail_bound_at_three() {
        let s = [sample(0, 0.0)];
        let refs: Vec<&ErrorSample> = s.iter().collect();
        let rows = summarize("v", &refs, 3.0, false);
        assert!((rows[0].tail_bound - 0.0222).abs() < 1e-4);
        assert_eq!(rows[0].bias_ok, None);
    }
}

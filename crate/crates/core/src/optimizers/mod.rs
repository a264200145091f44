//! Optimizers that request error targets instead of shot counts.
//!
//! Each optimizer decides, from its own state, how accurate the next
//! estimate must be (its sensitivity analysis) and hands that MSE target to
//! an estimator, which converts it to shots on a [`Device`]. Runs stop when
//! the next request no longer fits in the shot budget; a request is either
//! executed in full or not at all.

mod anneal;
mod descent;
mod device;

pub use anneal::{run_sa, sa_acceptance, sa_mse_target, ErrorPolicy, SaConfig};
pub use descent::{run_gd, GdConfig};
pub use device::{Device, ShiftTerm};

use crate::error::Error;
use crate::estimators::Estimate;

/// Estimator wired to an optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorKind {
    #[default]
    SampleMean,
    Recursive,
    /// Noise-free values from the simulator; no shots are consumed.
    Exact,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::SampleMean => "sample_mean",
            EstimatorKind::Recursive => "recursive",
            EstimatorKind::Exact => "exact",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sample_mean" => Ok(EstimatorKind::SampleMean),
            "recursive" => Ok(EstimatorKind::Recursive),
            "exact" => Ok(EstimatorKind::Exact),
            other => Err(Error::Config(format!("unknown estimator {other:?}"))),
        }
    }
}

/// One optimizer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    /// Current point (the incumbent, for annealing).
    pub theta: Vec<T>,
    /// Value estimate at `theta`.
    pub estimate: Estimate<T>,
    /// Gradient estimates at `theta`; empty for annealing.
    pub gradient: Vec<Estimate<T>>,
    /// Shots spent in this iteration.
    pub shots: u64,
    pub cumulative_shots: u64,
    /// Simulator ground truth at `theta`, for evaluation only.
    pub exact_f: T,
    pub accepted: Option<bool>,
    pub temperature: Option<T>,
    /// MSE target requested for the value estimate in this iteration.
    pub mse_target: T,
}

//! Estimators with sufficient-shot allocation.
//!
//! An optimizer hands an estimator MSE targets. The estimator turns each
//! target into per-term shot counts ([`allocation`]), consumes the resulting
//! samples, and returns an [`Estimate`] whose `mse_bound` is guaranteed to be
//! no larger than the target. Two estimators are provided: the memoryless
//! sample mean ([`sample_mean`]) and the recursive estimator
//! ([`recursive`]), which reuses the previous iterate's value and gradient
//! through a first-order extrapolation and only pays for fresh shots when
//! the carried bound no longer meets the target.

pub mod allocation;
pub mod recursive;
pub mod sample_mean;

pub use allocation::{
    shots_for_sm_df, shots_for_sm_f, GradientAllocation, ShotAllocation, ValueAllocation,
};
pub use recursive::{
    recursive_update, shots_for_recursive_df, shots_for_recursive_f, DriftBound, RecursiveModel,
    RecursivePlan, RecursiveState, RecursiveUpdate,
};
pub use sample_mean::{estimate_sm_df, estimate_sm_f};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Requested mean squared error for one estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MseTarget<T> {
    Bounded(T),
    /// No fresh shots are required for this quantity.
    Unbounded,
}

impl<T: Real> MseTarget<T> {
    pub fn bounded(value: T) -> Result<Self> {
        ensure_positive("mse target", value)?;
        Ok(MseTarget::Bounded(value))
    }

    pub fn value(self) -> Option<T> {
        match self {
            MseTarget::Bounded(v) => Some(v),
            MseTarget::Unbounded => None,
        }
    }
}

/// MSE targets for `f` and for each `∂_k f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTarget<T> {
    pub value: MseTarget<T>,
    pub gradient: Vec<MseTarget<T>>,
}

impl<T: Real> ErrorTarget<T> {
    pub fn new(e_f: T, e_grad: &[T]) -> Result<Self> {
        Ok(Self {
            value: MseTarget::bounded(e_f)?,
            gradient: e_grad
                .iter()
                .map(|&e| MseTarget::bounded(e))
                .collect::<Result<_>>()?,
        })
    }

    pub fn value_only(e_f: T, num_params: usize) -> Result<Self> {
        Ok(Self {
            value: MseTarget::bounded(e_f)?,
            gradient: vec![MseTarget::Unbounded; num_params],
        })
    }
}

/// A point estimate with worst-case error bounds.
///
/// `mse_bound = bias_bound² + variance_bound` holds for every value of this
/// type; the fields are only reachable through accessors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    value: T,
    variance_bound: T,
    bias_bound: T,
    mse_bound: T,
    shots_used: u64,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, variance_bound: T, bias_bound: T, shots_used: u64) -> Self {
        debug_assert!(variance_bound >= T::zero() && bias_bound >= T::zero());
        Self {
            value,
            variance_bound,
            bias_bound,
            mse_bound: bias_bound * bias_bound + variance_bound,
            shots_used,
        }
    }

    /// Unbiased estimate, as produced by the sample mean.
    pub fn unbiased(value: T, variance_bound: T, shots_used: u64) -> Self {
        Self::new(value, variance_bound, T::zero(), shots_used)
    }

    /// Noise-free value from an exact oracle.
    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero(), T::zero(), 0)
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn variance_bound(&self) -> T {
        self.variance_bound
    }

    pub fn bias_bound(&self) -> T {
        self.bias_bound
    }

    pub fn mse_bound(&self) -> T {
        self.mse_bound
    }

    pub fn shots_used(&self) -> u64 {
        self.shots_used
    }
}

/// Hoeffding-type confidence interval for an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval<T> {
    /// `κ·√variance_bound + bias_bound`
    pub radius: T,
    /// `2·exp(−κ²/2)`, an upper bound on `Pr(|ŝ − s| > radius)`.
    pub tail_bound: T,
}

/// Negative `kappa` is treated as zero, which gives the vacuous tail bound 2.
pub fn confidence_interval<T: Real>(est: &Estimate<T>, kappa: T) -> ConfidenceInterval<T> {
    let kappa = kappa.max(T::zero());
    ConfidenceInterval {
        radius: kappa * est.variance_bound().sqrt() + est.bias_bound(),
        tail_bound: T::lit(2.0) * (-(kappa * kappa) / T::lit(2.0)).exp(),
    }
}

pub(crate) fn ensure_positive<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name,
            value: value.as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ci_closed_form() {
        let e = Estimate::unbiased(0.3, 0.01, 100);
        let ci = confidence_interval(&e, 2.0);
        assert_abs_diff_eq!(ci.radius, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(ci.tail_bound, 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(ci.tail_bound, 0.2707, epsilon = 1e-4);

        let biased = Estimate::new(0.0, 0.0, 0.1, 0);
        assert_abs_diff_eq!(confidence_interval(&biased, 3.0).radius, 0.1);

        let tiny = confidence_interval(&e, 1e-9);
        assert_abs_diff_eq!(tiny.tail_bound, 2.0, epsilon = 1e-12);
        assert_eq!(confidence_interval(&e, -1.0).tail_bound, 2.0);
    }

    #[test]
    fn mse_is_bias_squared_plus_variance() {
        let e = Estimate::new(1.0, 0.02, 0.1, 5);
        assert_abs_diff_eq!(e.mse_bound(), 0.03, epsilon = 1e-15);
        assert_eq!(Estimate::exact(2.0).mse_bound(), 0.0);
    }

    #[test]
    fn targets_validate() {
        assert!(MseTarget::bounded(0.0).is_err());
        assert!(MseTarget::bounded(f64::INFINITY).is_err());
        assert!(ErrorTarget::new(0.1, &[0.1, -1.0]).is_err());
        let t = ErrorTarget::value_only(0.1, 2).unwrap();
        assert_eq!(t.gradient, vec![MseTarget::Unbounded; 2]);
    }
}

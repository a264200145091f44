//! Simulated annealing on estimated values.
//!
//! Acceptance uses the Metropolis rule on estimates. To keep the expected
//! log-ratio between the exact and the estimated transition probabilities
//! below `η`, each new estimate is requested with MSE at most `η²T_i²/2`
//! (the error-aware policy). The fixed policy requests a constant `E`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::device::Device;
use super::{EstimatorKind, TraceRow};
use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
use crate::estimators::{ensure_positive, shots_for_sm_f, Estimate};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorPolicy<T> {
    /// Constant MSE target `E`.
    Fixed(T),
    /// `η²T_i²/2` at temperature `T_i`.
    ErrorAware,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig<T> {
    pub t0: T,
    /// Geometric cooling factor `γ ∈ (0, 1)`, `T_i = t0·γ^i`.
    pub cooling: T,
    pub proposal_sigma: T,
    /// Budget `η` on the expected transition-probability log error.
    pub eta: T,
    pub shot_budget: u64,
    pub policy: ErrorPolicy<T>,
    /// Must be [`EstimatorKind::SampleMean`] or [`EstimatorKind::Exact`];
    /// acceptance needs unbiased estimates.
    pub estimator: EstimatorKind,
    /// Re-estimate the incumbent at every step under the current target.
    pub refresh_incumbent: bool,
    pub max_iters: Option<usize>,
}

impl<T: Real> SaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("t0", self.t0)?;
        ensure_positive("proposal_sigma", self.proposal_sigma)?;
        ensure_positive("eta", self.eta)?;
        if !(self.cooling > T::zero() && self.cooling < T::one()) {
            return Err(Error::Config(format!(
                "cooling must lie in (0, 1), got {}",
                self.cooling
            )));
        }
        if let ErrorPolicy::Fixed(e) = self.policy {
            ensure_positive("fixed mse target", e)?;
        }
        if self.estimator == EstimatorKind::Recursive {
            return Err(Error::Config(
                "simulated annealing requires an unbiased estimator; recursive is not allowed"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn temperature(&self, i: usize) -> T {
        self.t0 * self.cooling.powi(i.min(i32::MAX as usize) as i32)
    }

    pub fn mse_target(&self, temperature: T) -> T {
        match self.policy {
            ErrorPolicy::Fixed(e) => e,
            ErrorPolicy::ErrorAware => sa_mse_target(self.eta, temperature),
        }
    }
}

/// `η²T²/2`
pub fn sa_mse_target<T: Real>(eta: T, temperature: T) -> T {
    eta * eta * temperature * temperature / T::lit(2.0)
}

/// Metropolis rule on estimates: always accept a decrease, otherwise accept
/// with probability `exp(−(f_new − f_old)/T)`.
pub fn sa_acceptance<T: Real, R: Rng + ?Sized>(
    f_new: T,
    f_old: T,
    temperature: T,
    rng: &mut R,
) -> bool {
    if f_new < f_old {
        return true;
    }
    let p = (-(f_new - f_old) / temperature).exp();
    T::lit(rng.random::<f64>()) < p
}

fn estimate_at<T: Real, R: Rng + ?Sized>(
    device: &mut Device<'_, T>,
    kind: EstimatorKind,
    theta: &[T],
    target: T,
    rng: &mut R,
) -> Result<Option<Estimate<T>>> {
    if kind == EstimatorKind::Exact {
        return device.exact_value(theta).map(|v| Some(Estimate::exact(v)));
    }
    let alloc = match shots_for_sm_f(target, &device.term_norms()) {
        Ok(a) => a,
        Err(Error::ShotOverflow) => return Ok(None),
        Err(e) => return Err(e),
    };
    device.estimate_value(theta, &alloc, rng)
}

/// Run simulated annealing from `theta0`. Row 0 is the initial point.
///
/// The run stops after the iteration whose shots reach the budget; that
/// iteration completes, so the last row may overshoot the budget by at most
/// one estimate. A target too small to allocate without overflowing also
/// ends the run.
pub fn run_sa<T: Real, R: Rng + ?Sized>(
    problem: &BenchmarkProblem<T>,
    config: &SaConfig<T>,
    theta0: &[T],
    rng: &mut R,
) -> Result<Vec<TraceRow<T>>> {
    config.validate()?;
    if config.estimator == EstimatorKind::Exact && config.max_iters.is_none() {
        return Err(Error::Config("exact estimator needs max_iters".into()));
    }
    problem.circuit.check_theta(theta0)?;
    let mut device = Device::new(problem);
    let budget = config.shot_budget;

    let t_init = config.temperature(0);
    let target0 = config.mse_target(t_init);
    let mut incumbent = theta0.to_vec();
    let mut inc_est = estimate_at(&mut device, config.estimator, &incumbent, target0, rng)?
        .ok_or(Error::ShotOverflow)?;
    let mut inc_exact = device.exact_value(&incumbent)?;
    let mut rows = vec![TraceRow {
        iteration: 0,
        theta: incumbent.clone(),
        estimate: inc_est,
        gradient: Vec::new(),
        shots: device.shots_used(),
        cumulative_shots: device.shots_used(),
        exact_f: inc_exact,
        accepted: None,
        temperature: Some(t_init),
        mse_target: target0,
    }];

    let mut i = 0usize;
    loop {
        if config.max_iters.is_some_and(|n| i >= n) || device.shots_used() >= budget {
            break;
        }
        let temperature = config.temperature(i);
        let target = config.mse_target(temperature);
        let before = device.shots_used();

        let proposal: Vec<T> = incumbent
            .iter()
            .map(|&t| {
                let z: f64 = StandardNormal.sample(rng);
                t + config.proposal_sigma * T::lit(z)
            })
            .collect();
        let Some(new_est) = estimate_at(&mut device, config.estimator, &proposal, target, rng)?
        else {
            break;
        };
        if config.refresh_incumbent {
            match estimate_at(&mut device, config.estimator, &incumbent, target, rng)? {
                Some(e) => inc_est = e,
                None => break,
            }
        }

        let accepted = sa_acceptance(new_est.value(), inc_est.value(), temperature, rng);
        if accepted {
            incumbent = proposal;
            inc_est = new_est;
            inc_exact = device.exact_value(&incumbent)?;
        }
        i += 1;
        rows.push(TraceRow {
            iteration: i,
            theta: incumbent.clone(),
            estimate: inc_est,
            gradient: Vec::new(),
            shots: device.shots_used() - before,
            cumulative_shots: device.shots_used(),
            exact_f: inc_exact,
            accepted: Some(accepted),
            temperature: Some(temperature),
            mse_target: target,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_cosine_problem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(policy: ErrorPolicy<f64>) -> SaConfig<f64> {
        SaConfig {
            t0: 1.0,
            cooling: 0.97,
            proposal_sigma: 0.3,
            eta: 0.2,
            shot_budget: 3000,
            policy,
            estimator: EstimatorKind::SampleMean,
            refresh_incumbent: false,
            max_iters: None,
        }
    }

    #[test]
    fn target_examples() {
        assert!((sa_mse_target(0.1f64, 1.0) - 0.005).abs() < 1e-15);
        assert!((sa_mse_target(1.0, 2f64.sqrt()) - 1.0).abs() < 1e-15);
        assert!(sa_mse_target(1.0, 1e-200) < 1e-300);
    }

    #[test]
    fn acceptance_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| sa_acceptance(0.2, 0.5, 1e-9, &mut rng)));
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sa_acceptance(1.0, 0.0, 1.0, &mut rng))
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - (-1.0f64).exp()).abs() < 0.01, "{rate}");
        assert!((0..1000).all(|_| sa_acceptance(1.0, 0.0, 1e12, &mut rng)));
    }

    #[test]
    fn config_validation() {
        let mut c = config(ErrorPolicy::ErrorAware);
        assert!(c.validate().is_ok());
        c.cooling = 1.0;
        assert!(c.validate().is_err());
        let mut c = config(ErrorPolicy::Fixed(0.0));
        assert!(c.validate().is_err());
        c.policy = ErrorPolicy::Fixed(0.1);
        c.estimator = EstimatorKind::Recursive;
        assert!(c.validate().is_err());
    }

    #[test]
    fn error_aware_targets_decrease_and_budget_is_respected() {
        let p = make_cosine_problem::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows = run_sa(&p, &config(ErrorPolicy::ErrorAware), &[0.05], &mut rng).unwrap();
        assert!(rows.len() > 2);
        for w in rows.windows(2) {
            assert!(w[1].mse_target <= w[0].mse_target);
            assert!(w[1].cumulative_shots >= w[0].cumulative_shots);
            assert_eq!(w[1].cumulative_shots, w[0].cumulative_shots + w[1].shots);
        }
        let n = rows.len();
        assert!(rows[n - 2].cumulative_shots < 3000);
        assert!(rows[n - 1].cumulative_shots >= 3000);
    }

    #[test]
    fn hot_flat_walk_accepts_everything() {
        let p = make_cosine_problem::<f64>();
        let mut c = config(ErrorPolicy::Fixed(0.5));
        c.t0 = 1e9;
        c.cooling = 0.999;
        c.shot_budget = 400;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = run_sa(&p, &c, &[0.0], &mut rng).unwrap();
        assert!(rows[1..].iter().all(|r| r.accepted == Some(true)));
    }

    #[test]
    fn tiny_budget_completes_one_estimate() {
        let p = make_cosine_problem::<f64>();
        let mut c = config(ErrorPolicy::Fixed(0.01));
        c.shot_budget = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = run_sa(&p, &c, &[0.0], &mut rng).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].cumulative_shots, 100);
    }
}

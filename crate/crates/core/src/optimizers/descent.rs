//! Gradient descent on estimated gradients, `θ_{i+1} = θ_i − λ ∇̂f(θ_i)`.

use rand::Rng;

use super::device::Device;
use super::{EstimatorKind, TraceRow};
use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
use crate::estimators::{
    ensure_positive, recursive_update, shots_for_recursive_df, shots_for_recursive_f,
    shots_for_sm_df, shots_for_sm_f, DriftBound, Estimate, GradientAllocation, RecursiveModel,
    RecursiveState, ValueAllocation,
};
use crate::scalar::Real;
use crate::sim;

#[derive(Debug, Clone, PartialEq)]
pub struct GdConfig<T> {
    pub learning_rate: T,
    /// MSE target for value estimates.
    pub e_f: T,
    /// MSE target for each gradient component.
    pub e_grad: Vec<T>,
    pub max_iters: usize,
    pub shot_budget: u64,
    pub estimator: EstimatorKind,
    /// Gradient drift bound used by the recursive estimator.
    pub drift: DriftBound,
}

impl<T: Real> GdConfig<T> {
    pub fn validate(&self, num_params: usize) -> Result<()> {
        ensure_positive("learning_rate", self.learning_rate)?;
        ensure_positive("e_f", self.e_f)?;
        if self.e_grad.len() != num_params {
            return Err(Error::ParameterCount {
                expected: num_params,
                actual: self.e_grad.len(),
            });
        }
        for &e in &self.e_grad {
            ensure_positive("e_grad", e)?;
        }
        Ok(())
    }
}

struct Plan<T> {
    value: ValueAllocation<T>,
    gradient: Vec<GradientAllocation<T>>,
    alpha: T,
    betas: Vec<T>,
}

fn sample_mean_plan<T: Real>(device: &Device<'_, T>, config: &GdConfig<T>) -> Result<Plan<T>> {
    let m = config.e_grad.len();
    Ok(Plan {
        value: shots_for_sm_f(config.e_f, &device.term_norms())?,
        gradient: (0..m)
            .map(|k| shots_for_sm_df(config.e_grad[k], &device.shift_norms(k)))
            .collect::<Result<_>>()?,
        alpha: T::zero(),
        betas: vec![T::zero(); m],
    })
}

fn recursive_plan<T: Real>(
    device: &Device<'_, T>,
    config: &GdConfig<T>,
    state: &RecursiveState<T>,
    delta: &[T],
    model: &RecursiveModel<T>,
) -> Result<Plan<T>> {
    let m = config.e_grad.len();
    let vp = shots_for_recursive_f(config.e_f, state, delta, model, &device.term_norms())?;
    let mut gradient = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    for k in 0..m {
        let gp = shots_for_recursive_df(
            config.e_grad[k],
            state,
            delta,
            model,
            &device.shift_norms(k),
            k,
        )?;
        gradient.push(gp.allocation);
        betas.push(gp.weight);
    }
    Ok(Plan {
        value: vp.allocation,
        gradient,
        alpha: vp.weight,
        betas,
    })
}

/// Run gradient descent from `theta0` for at most `max_iters` iterations.
///
/// Each row holds the value and gradient estimates at its `theta`; the step
/// to the next row uses that gradient. As with annealing, the iteration whose
/// shots reach the budget completes and the run stops after it.
pub fn run_gd<T: Real, R: Rng + ?Sized>(
    problem: &BenchmarkProblem<T>,
    config: &GdConfig<T>,
    theta0: &[T],
    rng: &mut R,
) -> Result<Vec<TraceRow<T>>> {
    let m = problem.num_params();
    config.validate(m)?;
    problem.circuit.check_theta(theta0)?;
    let model = RecursiveModel::new(
        sim::curvature_norm(&problem.circuit, &problem.observable),
        config.drift,
    )?;
    let mut device = Device::new(problem);
    let mut theta = theta0.to_vec();
    let mut delta = vec![T::zero(); m];
    let mut state = RecursiveState::new(theta.clone());
    let mut rows = Vec::new();

    for i in 0..config.max_iters {
        if device.shots_used() >= config.shot_budget {
            break;
        }
        let before = device.shots_used();
        let (value, gradient) = match config.estimator {
            EstimatorKind::Exact => (
                Estimate::exact(device.exact_value(&theta)?),
                device
                    .exact_gradient(&theta)?
                    .into_iter()
                    .map(Estimate::exact)
                    .collect::<Vec<_>>(),
            ),
            kind => {
                let plan = match kind {
                    EstimatorKind::Recursive => {
                        recursive_plan(&device, config, &state, &delta, &model)
                    }
                    _ => sample_mean_plan(&device, config),
                };
                let plan = match plan {
                    Ok(p) => p,
                    Err(Error::ShotOverflow) => break,
                    Err(e) => return Err(e),
                };
                let fresh_f = device.estimate_value(&theta, &plan.value, rng)?;
                let fresh_grad = plan
                    .gradient
                    .iter()
                    .enumerate()
                    .map(|(k, a)| device.estimate_gradient(&theta, k, a, rng))
                    .collect::<Result<Vec<_>>>()?;
                if kind == EstimatorKind::Recursive {
                    let up = recursive_update(
                        &state,
                        &delta,
                        fresh_f.as_ref(),
                        &fresh_grad,
                        plan.alpha,
                        &plan.betas,
                        &model,
                    )?;
                    state = up.state;
                    (up.value, up.gradient)
                } else {
                    let missing = || Error::MissingFresh;
                    (
                        fresh_f.ok_or_else(missing)?,
                        fresh_grad
                            .into_iter()
                            .map(|g| g.ok_or_else(missing))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
            }
        };
        rows.push(TraceRow {
            iteration: i,
            theta: theta.clone(),
            estimate: value,
            gradient: gradient.clone(),
            shots: device.shots_used() - before,
            cumulative_shots: device.shots_used(),
            exact_f: device.exact_value(&theta)?,
            accepted: None,
            temperature: None,
            mse_target: config.e_f,
        });
        for k in 0..m {
            delta[k] = -config.learning_rate * gradient[k].value();
            theta[k] += delta[k];
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_cosine_problem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn config(kind: EstimatorKind) -> GdConfig<f64> {
        GdConfig {
            learning_rate: 0.5,
            e_f: 0.01,
            e_grad: vec![0.01],
            max_iters: 30,
            shot_budget: u64::MAX,
            estimator: kind,
            drift: DriftBound::Algorithm,
        }
    }

    #[test]
    fn stationary_at_zero_gradient() {
        let p = make_cosine_problem::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows = run_gd(&p, &config(EstimatorKind::Exact), &[0.0], &mut rng).unwrap();
        assert!(rows.iter().all(|r| r.theta == vec![0.0]));
    }

    #[test]
    fn exact_oracle_converges_to_pi() {
        let p = make_cosine_problem::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = config(EstimatorKind::Exact);
        c.learning_rate = 1.0;
        let rows = run_gd(&p, &c, &[1.0], &mut rng).unwrap();
        let last = rows.last().unwrap();
        assert!((last.theta[0] - PI).abs() < 1e-6, "{}", last.theta[0]);
        assert!((last.exact_f + 1.0).abs() < 1e-10);
        for w in rows.windows(2) {
            assert!(w[1].exact_f <= w[0].exact_f + 1e-15);
        }
        assert!(rows.iter().all(|r| r.shots == 0));
    }

    #[test]
    fn budget_accounting() {
        let p = make_cosine_problem::<f64>();
        let mut c = config(EstimatorKind::SampleMean);
        c.shot_budget = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = run_gd(&p, &c, &[1.0], &mut rng).unwrap();
        let total: u64 = rows.iter().map(|r| r.shots).sum();
        assert_eq!(total, rows.last().unwrap().cumulative_shots);
        // value 100 shots + gradient 2·⌈√(1/4)/√0.01·…⌉ per iteration
        assert!(rows[rows.len() - 2].cumulative_shots < 1000);
        assert!(rows.last().unwrap().cumulative_shots >= 1000);
    }

    #[test]
    fn recursive_never_needs_more_shots() {
        let p = make_cosine_problem::<f64>();
        let c = config(EstimatorKind::Recursive);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows = run_gd(&p, &c, &[1.0], &mut rng).unwrap();
        let dev = Device::new(&p);
        let sm = sample_mean_plan(&dev, &c).unwrap();
        let per_iter = sm.value.total() + sm.gradient.iter().map(|g| g.total()).sum::<u64>();
        assert_eq!(rows[0].shots, per_iter);
        assert!(rows.iter().all(|r| r.shots <= per_iter));
        assert!(rows.iter().any(|r| r.shots < per_iter));
        assert!(rows.iter().all(|r| r.estimate.mse_bound() <= 0.01 + 1e-12));
    }

    #[test]
    fn validation() {
        let p = make_cosine_problem::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = config(EstimatorKind::SampleMean);
        c.e_grad = vec![0.01, 0.01];
        assert!(run_gd(&p, &c, &[0.0], &mut rng).is_err());
        c.e_grad = vec![0.01];
        c.learning_rate = 0.0;
        assert!(run_gd(&p, &c, &[0.0], &mut rng).is_err());
    }
}

//! Recursive estimator for values and gradients along an optimizer trajectory.
//!
//! With `θ_i = θ_{i−1} + δθ_{i−1}` the estimates are
//!
//! ```text
//! f*_i    = α_i (f*_{i−1} + δθ_{i−1}·∇f*_{i−1}) + (1 − α_i) f̂_i
//! ∂_k f*_i = β_{k,i} ∂_k f*_{i−1} + (1 − β_{k,i}) ∂̂_k f_i
//! ```
//!
//! and the state carries a bias bound `B` and a variance bound `A²` for each
//! quantity, propagated with the Hessian bound `m‖O‖₂`:
//!
//! ```text
//! B_i     = α_i (B_{i−1} + Σ_k |δθ_k| B_∂k + (m/2)‖δθ‖² ‖O‖)
//! A²_i    = α_i² (A²_{i−1} + Σ_k δθ_k² A²_∂k) + (1 − α_i)² ε_f
//! B_∂k,i  = β (B_∂k + drift · ‖δθ‖ ‖O‖)
//! A²_∂k,i = β² A²_∂k + (1 − β)² ε_∂k
//! ```
//!
//! The allocators pick the fresh-shot target `E′` and the mixing weight so
//! that `B² + A²` lands exactly on the requested MSE: with prior bound
//! `p = b² + a > E`, `E′ = pE/(p − E)` and weight `E/p` give
//! `(E/p)² p + (1 − E/p)² E′ = E`. When `p ≤ E` no shots are taken and the
//! weight is 1.

use super::allocation::{
    shots_for_sm_df, shots_for_sm_f, GradientAllocation, ValueAllocation,
};
use super::{ensure_positive, Estimate};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bound on `|∂_k f(θ + δθ) − ∂_k f(θ)|` as a multiple of `‖δθ‖₂‖O‖₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftBound {
    /// Factor 1.
    Theorem,
    /// Factor `√m`, the row-norm bound of an entrywise-bounded Hessian.
    SqrtParams,
    /// Factor `m`, the most conservative.
    #[default]
    Algorithm,
}

impl DriftBound {
    pub fn factor<T: Real>(self, num_params: usize) -> T {
        let m = T::from_count(num_params as u64);
        match self {
            DriftBound::Theorem => T::one(),
            DriftBound::SqrtParams => m.sqrt(),
            DriftBound::Algorithm => m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DriftBound::Theorem => "theorem",
            DriftBound::SqrtParams => "sqrt-m",
            DriftBound::Algorithm => "algorithm",
        }
    }
}

impl std::str::FromStr for DriftBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(DriftBound::Theorem),
            "sqrt-m" => Ok(DriftBound::SqrtParams),
            "algorithm" => Ok(DriftBound::Algorithm),
            other => Err(Error::Config(format!("unknown drift bound {other:?}"))),
        }
    }
}

/// Problem constants the bound recursion needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursiveModel<T> {
    /// `‖O‖₂`, or a curvature-scaled norm when parameters are shared
    /// (see [`crate::sim::curvature_norm`]).
    pub obs_norm: T,
    pub drift: DriftBound,
}

impl<T: Real> RecursiveModel<T> {
    pub fn new(obs_norm: T, drift: DriftBound) -> Result<Self> {
        ensure_positive("obs_norm", obs_norm)?;
        Ok(Self { obs_norm, drift })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveState<T> {
    f_star: T,
    grad_star: Vec<T>,
    b_f: T,
    var_f: T,
    b_grad: Vec<T>,
    var_grad: Vec<T>,
    theta_prev: Vec<T>,
    initialized: bool,
}

impl<T: Real> RecursiveState<T> {
    /// Empty state anchored at the starting point.
    pub fn new(theta0: Vec<T>) -> Self {
        let m = theta0.len();
        Self {
            f_star: T::zero(),
            grad_star: vec![T::zero(); m],
            b_f: T::zero(),
            var_f: T::zero(),
            b_grad: vec![T::zero(); m],
            var_grad: vec![T::zero(); m],
            theta_prev: theta0,
            initialized: false,
        }
    }

    pub fn num_params(&self) -> usize {
        self.theta_prev.len()
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn f_star(&self) -> T {
        self.f_star
    }

    pub fn grad_star(&self) -> &[T] {
        &self.grad_star
    }

    pub fn bias_f(&self) -> T {
        self.b_f
    }

    pub fn variance_f(&self) -> T {
        self.var_f
    }

    pub fn bias_grad(&self) -> &[T] {
        &self.b_grad
    }

    pub fn variance_grad(&self) -> &[T] {
        &self.var_grad
    }

    pub fn theta(&self) -> &[T] {
        &self.theta_prev
    }

    fn check_step(&self, delta_theta: &[T]) -> Result<()> {
        if delta_theta.len() != self.num_params() {
            return Err(Error::ParameterCount {
                expected: self.num_params(),
                actual: delta_theta.len(),
            });
        }
        Ok(())
    }

    /// Carried `(b, a)` for the value before mixing in fresh shots.
    pub fn value_prior(&self, delta_theta: &[T], model: &RecursiveModel<T>) -> Result<(T, T)> {
        self.check_step(delta_theta)?;
        let m = T::from_count(self.num_params() as u64);
        let step_sq: T = delta_theta.iter().map(|&d| d * d).sum();
        let b = self.b_f
            + delta_theta
                .iter()
                .zip(&self.b_grad)
                .map(|(&d, &bg)| d.abs() * bg)
                .sum::<T>()
            + m / T::lit(2.0) * step_sq * model.obs_norm;
        let a = self.var_f
            + delta_theta
                .iter()
                .zip(&self.var_grad)
                .map(|(&d, &vg)| d * d * vg)
                .sum::<T>();
        Ok((b, a))
    }

    /// Carried `(b, a)` for `∂_k f` before mixing in fresh shots.
    pub fn gradient_prior(
        &self,
        delta_theta: &[T],
        model: &RecursiveModel<T>,
        k: usize,
    ) -> Result<(T, T)> {
        self.check_step(delta_theta)?;
        if k >= self.num_params() {
            return Err(Error::ParameterIndex {
                index: k,
                num_params: self.num_params(),
            });
        }
        let step: T = delta_theta.iter().map(|&d| d * d).sum::<T>().sqrt();
        let drift = model.drift.factor::<T>(self.num_params()) * step * model.obs_norm;
        Ok((self.b_grad[k] + drift, self.var_grad[k]))
    }
}

/// Allocation and mixing weight for one recursive estimate, with the bounds
/// the estimate will carry once the fresh samples are mixed in.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursivePlan<T, A> {
    pub allocation: A,
    /// `α_i` (value) or `β_{k,i}` (gradient).
    pub weight: T,
    pub bias: T,
    pub variance: T,
}

impl<T: Real, A> RecursivePlan<T, A> {
    pub fn mse(&self) -> T {
        self.bias * self.bias + self.variance
    }
}

fn plan<T: Real, A>(
    target: T,
    prior: Option<(T, T)>,
    allocate: impl Fn(T) -> Result<A>,
    epsilon: impl Fn(&A) -> T,
    none: A,
) -> Result<RecursivePlan<T, A>> {
    let Some((b, a)) = prior else {
        let allocation = allocate(target)?;
        let variance = epsilon(&allocation);
        return Ok(RecursivePlan {
            allocation,
            weight: T::zero(),
            bias: T::zero(),
            variance,
        });
    };
    let p = b * b + a;
    if p <= target {
        return Ok(RecursivePlan {
            allocation: none,
            weight: T::one(),
            bias: b,
            variance: a,
        });
    }
    let fresh_target = p * target / (p - target);
    let allocation = allocate(fresh_target)?;
    let eps = epsilon(&allocation);
    let w = target / p;
    Ok(RecursivePlan {
        allocation,
        weight: w,
        bias: w * b,
        variance: w * w * a + (T::one() - w) * (T::one() - w) * eps,
    })
}

/// Shots and `α_i` for the next recursive value estimate with MSE `≤ e_f`.
pub fn shots_for_recursive_f<T: Real>(
    e_f: T,
    state: &RecursiveState<T>,
    delta_theta: &[T],
    model: &RecursiveModel<T>,
    term_norms: &[T],
) -> Result<RecursivePlan<T, ValueAllocation<T>>> {
    ensure_positive("e_f", e_f)?;
    let prior = if state.is_initialized() {
        Some(state.value_prior(delta_theta, model)?)
    } else {
        None
    };
    plan(
        e_f,
        prior,
        |e| shots_for_sm_f(e, term_norms),
        |a| a.epsilon,
        ValueAllocation::none(term_norms.len()),
    )
}

/// Shots and `β_{k,i}` for the next recursive estimate of `∂_k f` with MSE
/// `≤ e_dkf`.
pub fn shots_for_recursive_df<T: Real>(
    e_dkf: T,
    state: &RecursiveState<T>,
    delta_theta: &[T],
    model: &RecursiveModel<T>,
    term_norms: &[T],
    k: usize,
) -> Result<RecursivePlan<T, GradientAllocation<T>>> {
    ensure_positive("e_dkf", e_dkf)?;
    let prior = if state.is_initialized() {
        Some(state.gradient_prior(delta_theta, model, k)?)
    } else {
        None
    };
    plan(
        e_dkf,
        prior,
        |e| shots_for_sm_df(e, term_norms),
        |a| a.epsilon,
        GradientAllocation::none(term_norms.len()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveUpdate<T> {
    pub state: RecursiveState<T>,
    pub value: Estimate<T>,
    pub gradient: Vec<Estimate<T>>,
}

fn check_weight<T: Real>(name: &'static str, w: T) -> Result<()> {
    if w >= T::zero() && w <= T::one() {
        Ok(())
    } else {
        Err(Error::WeightOutOfRange {
            name,
            value: w.as_f64(),
        })
    }
}

fn mix<T: Real>(
    weight: T,
    carried: T,
    carried_bias: T,
    carried_var: T,
    fresh: Option<&Estimate<T>>,
) -> Result<(T, T, T, u64)> {
    let shots = fresh.map_or(0, Estimate::shots_used);
    if weight == T::one() {
        return Ok((carried, carried_bias, carried_var, shots));
    }
    let fresh = fresh.ok_or(Error::MissingFresh)?;
    let u = T::one() - weight;
    Ok((
        weight * carried + u * fresh.value(),
        weight * carried_bias + u * fresh.bias_bound(),
        weight * weight * carried_var + u * u * fresh.variance_bound(),
        shots,
    ))
}

/// Advance the recursive estimator by one optimizer step.
///
/// `delta_theta` is the step that led from the state's point to the current
/// one. On the first call (`state` not initialized) both weights must be 0
/// and the fresh estimates become the state.
pub fn recursive_update<T: Real>(
    state: &RecursiveState<T>,
    delta_theta: &[T],
    fresh_f: Option<&Estimate<T>>,
    fresh_grad: &[Option<Estimate<T>>],
    alpha: T,
    betas: &[T],
    model: &RecursiveModel<T>,
) -> Result<RecursiveUpdate<T>> {
    let m = state.num_params();
    state.check_step(delta_theta)?;
    for len in [fresh_grad.len(), betas.len()] {
        if len != m {
            return Err(Error::ParameterCount {
                expected: m,
                actual: len,
            });
        }
    }
    check_weight("alpha", alpha)?;
    for &b in betas {
        check_weight("beta", b)?;
    }

    if !state.is_initialized() {
        if alpha != T::zero() || betas.iter().any(|&b| b != T::zero()) {
            return Err(Error::Uninitialized);
        }
        let f = *fresh_f.ok_or(Error::MissingFresh)?;
        let grads = fresh_grad
            .iter()
            .map(|g| g.ok_or(Error::MissingFresh))
            .collect::<Result<Vec<_>>>()?;
        let next = RecursiveState {
            f_star: f.value(),
            grad_star: grads.iter().map(Estimate::value).collect(),
            b_f: f.bias_bound(),
            var_f: f.variance_bound(),
            b_grad: grads.iter().map(Estimate::bias_bound).collect(),
            var_grad: grads.iter().map(Estimate::variance_bound).collect(),
            theta_prev: state.theta_prev.clone(),
            initialized: true,
        };
        return Ok(RecursiveUpdate {
            state: next,
            value: f,
            gradient: grads,
        });
    }

    let (b, a) = state.value_prior(delta_theta, model)?;
    let extrapolated = state.f_star
        + delta_theta
            .iter()
            .zip(&state.grad_star)
            .map(|(&d, &g)| d * g)
            .sum::<T>();
    let (f_star, b_f, var_f, f_shots) = mix(alpha, extrapolated, b, a, fresh_f)?;

    let mut grad_star = Vec::with_capacity(m);
    let mut b_grad = Vec::with_capacity(m);
    let mut var_grad = Vec::with_capacity(m);
    let mut gradient = Vec::with_capacity(m);
    for k in 0..m {
        let (bk, ak) = state.gradient_prior(delta_theta, model, k)?;
        let (g, bg, vg, shots) = mix(
            betas[k],
            state.grad_star[k],
            bk,
            ak,
            fresh_grad[k].as_ref(),
        )?;
        grad_star.push(g);
        b_grad.push(bg);
        var_grad.push(vg);
        gradient.push(Estimate::new(g, vg, bg, shots));
    }

    let theta_prev = state
        .theta_prev
        .iter()
        .zip(delta_theta)
        .map(|(&t, &d)| t + d)
        .collect();
    let next = RecursiveState {
        f_star,
        grad_star,
        b_f,
        var_f,
        b_grad,
        var_grad,
        theta_prev,
        initialized: true,
    };
    Ok(RecursiveUpdate {
        state: next,
        value: Estimate::new(f_star, var_f, b_f, f_shots),
        gradient,
    })
}

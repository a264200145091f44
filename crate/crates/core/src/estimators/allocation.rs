//! Sufficient shots for the sample-mean estimator.
//!
//! Relaxing the integer program `min Σ r_j s.t. Σ ‖D_j‖²/r_j ≤ E` to real
//! `r_j` gives the Lagrangian solution `r_j = ‖D_j‖·(Σ_i ‖D_i‖)/E`. Rounding up
//! keeps the bound and costs at most one extra shot per term.

use super::{ensure_positive, MseTarget};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shots for a value estimate, one count per observable term.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueAllocation<T> {
    pub shots: Vec<u64>,
    /// `Σ ‖D_j‖²/r_j`, or `+∞` when no shots are taken.
    pub epsilon: T,
}

/// Shots at `θ ± π/2·e_k` for one partial derivative, one count per
/// shift term (see [`crate::optimizers::Device`] for shared parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientAllocation<T> {
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
    /// `Σ (‖D_j‖²/4)(1/r_{j+} + 1/r_{j−})`, or `+∞` when no shots are taken.
    pub epsilon: T,
}

/// Allocation for a value and every partial derivative at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotAllocation<T> {
    pub value: ValueAllocation<T>,
    pub gradient: Vec<GradientAllocation<T>>,
}

impl<T: Real> ValueAllocation<T> {
    pub fn none(num_terms: usize) -> Self {
        Self {
            shots: vec![0; num_terms],
            epsilon: T::infinity(),
        }
    }

    pub fn total(&self) -> u64 {
        self.shots.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

impl<T: Real> GradientAllocation<T> {
    pub fn none(num_terms: usize) -> Self {
        Self {
            plus: vec![0; num_terms],
            minus: vec![0; num_terms],
            epsilon: T::infinity(),
        }
    }

    pub fn total(&self) -> u64 {
        self.plus.iter().chain(&self.minus).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

impl<T: Real> ShotAllocation<T> {
    pub fn total(&self) -> u64 {
        self.value.total() + self.gradient.iter().map(GradientAllocation::total).sum::<u64>()
    }

    /// `ε_∂k` for every parameter.
    pub fn epsilon_grad(&self) -> Vec<T> {
        self.gradient.iter().map(|g| g.epsilon).collect()
    }
}

fn validate_norms<T: Real>(norms: &[T]) -> Result<()> {
    if norms.is_empty() {
        return Err(Error::EmptyObservable);
    }
    norms.iter().try_for_each(|&n| ensure_positive("term norm", n))
}

fn ceil_shots<T: Real>(x: T) -> Result<u64> {
    // Beyond 2^53 the count is no longer exact in f64 and cannot be simulated anyway.
    let c = x.ceil();
    match c.to_u64() {
        Some(n) if c <= T::lit(9.007_199_254_740_992e15) => Ok(n.max(1)),
        _ => Err(Error::ShotOverflow),
    }
}

/// Term whose extra shot lowers `Σ ‖D_j‖²/r_j` the most.
fn steepest_term<T: Real>(norms: &[T], shots: &[u64]) -> usize {
    let gain = |j: usize| {
        let r = T::from_count(shots[j]);
        norms[j] * norms[j] / (r * (r + T::one()))
    };
    (0..norms.len())
        .max_by(|&a, &b| gain(a).partial_cmp(&gain(b)).expect("finite gains"))
        .unwrap_or(0)
}

/// `ε_f = Σ ‖D_j‖²/r_j`
pub fn value_epsilon<T: Real>(norms: &[T], shots: &[u64]) -> T {
    if shots.iter().any(|&r| r == 0) {
        return T::infinity();
    }
    norms
        .iter()
        .zip(shots)
        .map(|(&d, &r)| d * d / T::from_count(r))
        .sum()
}

/// `ε_∂f = Σ (‖D_j‖²/4)(1/r_{j+} + 1/r_{j−})`
pub fn gradient_epsilon<T: Real>(norms: &[T], plus: &[u64], minus: &[u64]) -> T {
    if plus.iter().chain(minus).any(|&r| r == 0) {
        return T::infinity();
    }
    let four = T::lit(4.0);
    norms
        .iter()
        .zip(plus.iter().zip(minus))
        .map(|(&d, (&rp, &rm))| {
            d * d / four * (T::one() / T::from_count(rp) + T::one() / T::from_count(rm))
        })
        .sum()
}

/// Shots for the sample mean of `f` with `ε_f ≤ e_f`.
///
/// `r_j = ⌈‖D_j‖·ν⌉` with `ν = Σ‖D_j‖/e_f`.
pub fn shots_for_sm_f<T: Real>(e_f: T, term_norms: &[T]) -> Result<ValueAllocation<T>> {
    ensure_positive("e_f", e_f)?;
    validate_norms(term_norms)?;
    let nu = term_norms.iter().copied().sum::<T>() / e_f;
    let mut shots = term_norms
        .iter()
        .map(|&d| ceil_shots(d * nu))
        .collect::<Result<Vec<_>>>()?;
    let mut epsilon = value_epsilon(term_norms, &shots);
    // Float rounding in ν can leave ε a few ulps above the target.
    while epsilon > e_f {
        let j = steepest_term(term_norms, &shots);
        shots[j] += 1;
        epsilon = value_epsilon(term_norms, &shots);
    }
    Ok(ValueAllocation { shots, epsilon })
}

/// Shots for the shift-rule sample mean of one `∂_k f` with `ε_∂k ≤ e_dkf`.
///
/// `r_{j+} = r_{j−} = ⌈‖D_j‖·ν⌉` with `ν = Σ‖D_j‖/(2·e_dkf)`.
pub fn shots_for_sm_df<T: Real>(e_dkf: T, term_norms: &[T]) -> Result<GradientAllocation<T>> {
    ensure_positive("e_dkf", e_dkf)?;
    validate_norms(term_norms)?;
    let nu = term_norms.iter().copied().sum::<T>() / (T::lit(2.0) * e_dkf);
    let mut shots = term_norms
        .iter()
        .map(|&d| ceil_shots(d * nu))
        .collect::<Result<Vec<_>>>()?;
    let mut epsilon = gradient_epsilon(term_norms, &shots, &shots);
    while epsilon > e_dkf {
        let j = steepest_term(term_norms, &shots);
        shots[j] += 1;
        epsilon = gradient_epsilon(term_norms, &shots, &shots);
    }
    Ok(GradientAllocation {
        plus: shots.clone(),
        minus: shots,
        epsilon,
    })
}

/// [`shots_for_sm_f`] with an unbounded target mapped to no shots.
pub fn allocate_value<T: Real>(target: MseTarget<T>, term_norms: &[T]) -> Result<ValueAllocation<T>> {
    match target {
        MseTarget::Bounded(e) => shots_for_sm_f(e, term_norms),
        MseTarget::Unbounded => Ok(ValueAllocation::none(term_norms.len())),
    }
}

/// [`shots_for_sm_df`] with an unbounded target mapped to no shots.
pub fn allocate_gradient<T: Real>(
    target: MseTarget<T>,
    term_norms: &[T],
) -> Result<GradientAllocation<T>> {
    match target {
        MseTarget::Bounded(e) => shots_for_sm_df(e, term_norms),
        MseTarget::Unbounded => Ok(GradientAllocation::none(term_norms.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn value_examples() {
        let a = shots_for_sm_f(0.01, &[1.0]).unwrap();
        assert_eq!(a.shots, vec![100]);
        assert_abs_diff_eq!(a.epsilon, 0.01, epsilon = 1e-15);

        let a = shots_for_sm_f(0.5, &[1.0, 1.0]).unwrap();
        assert_eq!(a.shots, vec![4, 4]);
        assert_eq!(a.epsilon, 0.5);

        let a = shots_for_sm_f(1.0, &[1.0]).unwrap();
        assert_eq!(a.shots, vec![1]);
        assert_eq!(a.epsilon, 1.0);
    }

    #[test]
    fn gradient_examples() {
        let a = shots_for_sm_df(0.01, &[1.0]).unwrap();
        assert_eq!((a.plus.clone(), a.minus.clone()), (vec![50], vec![50]));
        assert_abs_diff_eq!(a.epsilon, 0.01, epsilon = 1e-15);

        let a = shots_for_sm_df(0.5, &[1.0]).unwrap();
        assert_eq!(a.plus, vec![1]);
        assert_eq!(a.epsilon, 0.5);

        let a = shots_for_sm_df(0.1, &[1.0; 4]).unwrap();
        assert_eq!(a.plus, vec![20; 4]);
        assert_eq!(a.minus, vec![20; 4]);
        assert_abs_diff_eq!(a.epsilon, 0.1, epsilon = 1e-15);
        assert_eq!(a.total(), 160);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(shots_for_sm_f(0.0, &[1.0]).is_err());
        assert!(shots_for_sm_f(-1.0, &[1.0]).is_err());
        assert!(shots_for_sm_f(0.1, &[1.0, 0.0]).is_err());
        assert!(shots_for_sm_f::<f64>(0.1, &[]).is_err());
        assert!(shots_for_sm_df(0.0, &[1.0]).is_err());
        assert!(shots_for_sm_df(0.1, &[-2.0]).is_err());
        assert_eq!(shots_for_sm_f(1e-300, &[1.0]), Err(Error::ShotOverflow));
    }

    #[test]
    fn unbounded_targets_take_no_shots() {
        let v = allocate_value(MseTarget::<f64>::Unbounded, &[1.0, 2.0]).unwrap();
        assert!(v.is_empty());
        assert!(v.epsilon.is_infinite());
        let g = allocate_gradient(MseTarget::<f64>::Unbounded, &[1.0]).unwrap();
        assert_eq!(g.total(), 0);
    }

    proptest! {
        #[test]
        fn allocations_are_sound_and_near_optimal(
            norms in prop::collection::vec(0.1f64..4.0, 1..=8),
            e in 1e-3f64..1.0,
        ) {
            let l = norms.len() as f64;
            let s: f64 = norms.iter().sum();

            let v = shots_for_sm_f(e, &norms).unwrap();
            prop_assert!(v.epsilon <= e);
            prop_assert_eq!(v.epsilon, value_epsilon(&norms, &v.shots));
            prop_assert!(v.total() as f64 <= s * s / e + l);

            let g = shots_for_sm_df(e, &norms).unwrap();
            prop_assert!(g.epsilon <= e);
            prop_assert_eq!(&g.plus, &g.minus);
            prop_assert!(g.total() as f64 <= s * s / e + 2.0 * l);
        }

        #[test]
        fn smaller_targets_never_need_fewer_shots(
            norms in prop::collection::vec(0.1f64..4.0, 1..=6),
            e in 1e-3f64..1.0,
            scale in 1.0f64..10.0,
        ) {
            let tight = shots_for_sm_f(e, &norms).unwrap();
            let loose = shots_for_sm_f(e * scale, &norms).unwrap();
            prop_assert!(loose.total() <= tight.total());
        }
    }
}

//! Exact statevector simulation of parameterized circuits.
//!
//! This module is the stand-in for the quantum device. [`exact_expectation`]
//! and [`shift_gradient`] give ground truth; [`sample_term`] and
//! [`TermSampler`] produce the measurement outcomes an estimator consumes.

mod circuit;
mod observable;
mod pauli;
mod state;

pub use circuit::{Circuit, Gate, MAX_QUBITS};
pub use observable::{DiagonalTerm, Observable};
pub use pauli::{Pauli, PauliString};
pub use state::StateVector;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shorthand for `circuit.apply(theta)`.
pub fn apply_circuit<T: Real>(circuit: &Circuit, theta: &[T]) -> Result<StateVector<T>> {
    circuit.apply(theta)
}

fn check_dims<T: Real>(circuit: &Circuit, obs: &Observable<T>) -> Result<()> {
    if circuit.num_qubits() != obs.num_qubits() {
        return Err(Error::DimensionMismatch {
            circuit: circuit.num_qubits(),
            observable: obs.num_qubits(),
        });
    }
    Ok(())
}

/// `⟨ψ|V† D V|ψ⟩` for a prepared state.
pub fn term_expectation<T: Real>(state: &StateVector<T>, term: &DiagonalTerm<T>) -> T {
    if term.is_computational() {
        return state.diagonal_expectation(term.diagonal());
    }
    let mut rotated = state.clone();
    term.basis_change()
        .apply_to(&mut rotated, &[])
        .expect("basis change matches state dimension");
    rotated.diagonal_expectation(term.diagonal())
}

/// `Σ_j ⟨ψ|V_j† D_j V_j|ψ⟩` for a prepared state.
pub fn state_expectation<T: Real>(state: &StateVector<T>, obs: &Observable<T>) -> T {
    obs.terms()
        .iter()
        .map(|t| term_expectation(state, t))
        .sum()
}

/// `f(θ) = ⟨0|U(θ)† O U(θ)|0⟩`, computed from amplitudes.
pub fn exact_expectation<T: Real>(
    circuit: &Circuit,
    theta: &[T],
    obs: &Observable<T>,
) -> Result<T> {
    check_dims(circuit, obs)?;
    let state = circuit.apply(theta)?;
    Ok(state_expectation(&state, obs))
}

/// Exact `∂f/∂θ_k` by the two-point shift rule.
///
/// When `θ_k` drives several rotations, the rule is applied to each
/// occurrence and the contributions summed (product rule).
pub fn shift_gradient<T: Real>(
    circuit: &Circuit,
    theta: &[T],
    obs: &Observable<T>,
    k: usize,
) -> Result<T> {
    check_dims(circuit, obs)?;
    circuit.check_theta(theta)?;
    if k >= circuit.num_params() {
        return Err(Error::ParameterIndex {
            index: k,
            num_params: circuit.num_params(),
        });
    }
    let s = T::FRAC_PI_2();
    let two = T::lit(2.0);
    let mut grad = T::zero();
    for g in circuit.gates_for_param(k) {
        let plus = circuit.apply_shifted(theta, Some((g, s)))?;
        let minus = circuit.apply_shifted(theta, Some((g, -s)))?;
        grad += (state_expectation(&plus, obs) - state_expectation(&minus, obs)) / two;
    }
    Ok(grad)
}

/// Exact gradient, one shift-rule evaluation per parameter.
pub fn exact_gradient<T: Real>(
    circuit: &Circuit,
    theta: &[T],
    obs: &Observable<T>,
) -> Result<Vec<T>> {
    (0..circuit.num_params())
        .map(|k| shift_gradient(circuit, theta, obs, k))
        .collect()
}

/// Upper bound `m‖O‖₂` on the spectral norm of the Hessian of `f`, valid when
/// every parameter drives a single Pauli rotation.
pub fn hessian_norm_bound<T: Real>(obs: &Observable<T>, num_params: usize) -> T {
    T::from_count(num_params as u64) * obs.norm_bound()
}

/// Norm to use in place of `‖O‖₂` in curvature bounds when parameters are
/// shared between gates. Each Hessian entry is a sum of `g_i g_j` shift-rule
/// quadruples, so `‖O‖₂` is scaled by the squared largest multiplicity.
pub fn curvature_norm<T: Real>(circuit: &Circuit, obs: &Observable<T>) -> T {
    let g = circuit.max_multiplicity().max(1) as u64;
    T::from_count(g * g) * obs.norm_bound()
}

/// Inverse-CDF sampler over the outcomes of one diagonal term at a fixed state.
#[derive(Debug, Clone)]
pub struct TermSampler<'a, T> {
    diagonal: &'a [T],
    cdf: Vec<T>,
}

impl<'a, T: Real> TermSampler<'a, T> {
    pub fn new(state: &StateVector<T>, term: &'a DiagonalTerm<T>) -> Self {
        let probs = if term.is_computational() {
            state.probabilities()
        } else {
            let mut rotated = state.clone();
            term.basis_change()
                .apply_to(&mut rotated, &[])
                .expect("basis change matches state dimension");
            rotated.probabilities()
        };
        let mut acc = T::zero();
        let cdf = probs
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            diagonal: term.diagonal(),
            cdf,
        }
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        // Scale by the total so that float drift in Σ|ψ|² is absorbed.
        let total = *self.cdf.last().expect("nonempty distribution");
        let u = T::lit(rng.random::<f64>()) * total;
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx < self.cdf.len() {
            return idx;
        }
        // u rounded up to the total: fall back to the last outcome with mass.
        (0..self.cdf.len())
            .rev()
            .find(|&i| i == 0 || self.cdf[i] > self.cdf[i - 1])
            .unwrap_or(0)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.diagonal[self.draw_index(rng)]
    }

    pub fn draw_many<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Vec<T> {
        (0..shots).map(|_| self.draw(rng)).collect()
    }
}

/// `r` measurement outcomes of term `V† D V` on `U(θ)|0⟩`. Each outcome is a
/// diagonal entry of `D`; `r = 0` yields an empty list.
pub fn sample_term<T: Real, R: Rng + ?Sized>(
    circuit: &Circuit,
    theta: &[T],
    term: &DiagonalTerm<T>,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<T>> {
    if circuit.num_qubits() != term.num_qubits() {
        return Err(Error::DimensionMismatch {
            circuit: circuit.num_qubits(),
            observable: term.num_qubits(),
        });
    }
    let state = circuit.apply(theta)?;
    if shots == 0 {
        return Ok(Vec::new());
    }
    Ok(TermSampler::new(&state, term).draw_many(shots, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cosine() -> (Circuit, Observable<f64>) {
        let mut c = Circuit::new(1, 1).unwrap();
        c.rotation("X".parse().unwrap(), 0).unwrap();
        let o = Observable::new(vec![DiagonalTerm::pauli(&"Z".parse().unwrap()).unwrap()])
            .unwrap();
        (c, o)
    }

    #[test]
    fn cosine_expectation_and_gradient() {
        let (c, o) = cosine();
        assert_eq!(exact_expectation(&c, &[0.0], &o).unwrap(), 1.0);
        for i in 0..25 {
            let t = -PI + i as f64 * 0.27;
            assert!((exact_expectation(&c, &[t], &o).unwrap() - t.cos()).abs() < 1e-12);
            assert!((shift_gradient(&c, &[t], &o, 0).unwrap() + t.sin()).abs() < 1e-12);
        }
        assert!(shift_gradient(&c, &[0.0], &o, 0).unwrap().abs() < 1e-15);
        assert!((shift_gradient(&c, &[PI / 2.0], &o, 0).unwrap() + 1.0).abs() < 1e-12);
        assert!(shift_gradient(&c, &[0.0], &o, 1).is_err());
    }

    #[test]
    fn shared_parameter_gradient_matches_finite_difference() {
        let mut c = Circuit::new(2, 1).unwrap();
        c.h(0).unwrap();
        c.rotation("XI".parse().unwrap(), 0).unwrap();
        c.cnot(0, 1).unwrap();
        c.rotation("YZ".parse().unwrap(), 0).unwrap();
        let o = Observable::new(vec![
            DiagonalTerm::pauli(&"ZI".parse().unwrap()).unwrap(),
            DiagonalTerm::pauli(&"XX".parse().unwrap()).unwrap(),
        ])
        .unwrap();
        let t = 0.37;
        let h = 1e-5;
        let fd = (exact_expectation(&c, &[t + h], &o).unwrap()
            - exact_expectation(&c, &[t - h], &o).unwrap())
            / (2.0 * h);
        let g: f64 = shift_gradient(&c, &[t], &o, 0).unwrap();
        assert!((g - fd).abs() < 1e-8, "{g} vs {fd}");
    }

    #[test]
    fn x_basis_term_expectation() {
        // H|0⟩ = |+⟩, ⟨X⟩ = 1
        let mut c = Circuit::new(1, 0).unwrap();
        c.h(0).unwrap();
        let o = Observable::new(vec![DiagonalTerm::pauli(&"X".parse().unwrap()).unwrap()])
            .unwrap();
        assert!((exact_expectation::<f64>(&c, &[], &o).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_term::<f64, _>(&c, &[], &o.terms()[0], 50, &mut rng).unwrap();
        assert!(s.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn sampling_deterministic_state() {
        let (c, o) = cosine();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_term(&c, &[0.0], &o.terms()[0], 1000, &mut rng).unwrap();
        assert_eq!(s.len(), 1000);
        assert!(s.iter().all(|&x| x == 1.0));
        assert!(sample_term(&c, &[0.3], &o.terms()[0], 0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn sampling_half_half() {
        let (c, o) = cosine();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = sample_term(&c, &[PI / 2.0], &o.terms()[0], 100_000, &mut rng).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn never_samples_zero_probability_outcome() {
        // |1⟩ exactly: only the −1 outcome has mass.
        let (c, o) = cosine();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = sample_term(&c, &[PI], &o.terms()[0], 10_000, &mut rng).unwrap();
        assert!(s.iter().all(|&x| x == -1.0));
    }

    #[test]
    fn hessian_bounds() {
        let (c, o) = cosine();
        assert_eq!(hessian_norm_bound(&o, 1), 1.0);
        let o2 = o.clone().with_norm_bound(2.0).unwrap();
        assert_eq!(hessian_norm_bound(&o2, 3), 6.0);
        assert_eq!(curvature_norm(&c, &o), 1.0);
    }

    #[test]
    fn single_precision_runs() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.rotation("X".parse().unwrap(), 0).unwrap();
        let o = Observable::<f32>::new(vec![DiagonalTerm::pauli(&"Z".parse().unwrap()).unwrap()])
            .unwrap();
        let f = exact_expectation(&c, &[1.0f32], &o).unwrap();
        assert!((f - 1.0f32.cos()).abs() < 1e-6);
        let g = shift_gradient(&c, &[1.0f32], &o, 0).unwrap();
        assert!((g + 1.0f32.sin()).abs() < 1e-6);
    }
}

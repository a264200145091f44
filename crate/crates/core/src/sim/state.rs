use num_complex::Complex;

use crate::scalar::Real;

/// Dense `2^n` amplitude vector. Qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// |0…0⟩
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << num_qubits];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `Σ_b d[b] |ψ_b|²`
    pub fn diagonal_expectation(&self, diagonal: &[T]) -> T {
        self.amplitudes
            .iter()
            .zip(diagonal)
            .map(|(a, &d)| a.norm_sqr() * d)
            .sum()
    }
}

use rand::Rng;

use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_sm_df, estimate_sm_f, Estimate, GradientAllocation, ValueAllocation,
};
use crate::scalar::Real;
use crate::sim::{self, Circuit, Observable, StateVector, TermSampler};

/// One shifted measurement setting for `∂_k f`: gate occurrence `gate` of
/// parameter `k` shifted by ±π/2, measured on observable term `term`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftTerm {
    pub gate: usize,
    pub term: usize,
}

/// Simulated device that counts every shot it hands out.
///
/// Gradient shots are organised by [`ShiftTerm`]. A parameter driving `g`
/// rotations has `g·ℓ` shift terms; with `g = 1` they coincide with the
/// observable terms.
#[derive(Debug)]
pub struct Device<'a, T> {
    circuit: &'a Circuit,
    observable: &'a Observable<T>,
    shots: u64,
}

impl<'a, T: Real> Device<'a, T> {
    pub fn new(problem: &'a BenchmarkProblem<T>) -> Self {
        Self {
            circuit: &problem.circuit,
            observable: &problem.observable,
            shots: 0,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn observable(&self) -> &Observable<T> {
        self.observable
    }

    /// Total shots sampled so far.
    pub fn shots_used(&self) -> u64 {
        self.shots
    }

    pub fn term_norms(&self) -> Vec<T> {
        self.observable.term_norms()
    }

    pub fn shift_terms(&self, k: usize) -> Vec<ShiftTerm> {
        self.circuit
            .gates_for_param(k)
            .into_iter()
            .flat_map(|gate| (0..self.observable.num_terms()).map(move |term| ShiftTerm { gate, term }))
            .collect()
    }

    pub fn shift_norms(&self, k: usize) -> Vec<T> {
        let norms = self.term_norms();
        self.shift_terms(k).iter().map(|s| norms[s.term]).collect()
    }

    pub fn exact_value(&self, theta: &[T]) -> Result<T> {
        sim::exact_expectation(self.circuit, theta, self.observable)
    }

    pub fn exact_gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        sim::exact_gradient(self.circuit, theta, self.observable)
    }

    fn draw<R: Rng + ?Sized>(
        &mut self,
        state: &StateVector<T>,
        term: usize,
        shots: u64,
        rng: &mut R,
    ) -> Vec<T> {
        self.shots += shots;
        if shots == 0 {
            return Vec::new();
        }
        TermSampler::new(state, &self.observable.terms()[term]).draw_many(shots, rng)
    }

    /// Outcomes for each observable term at `θ`.
    pub fn measure_value<R: Rng + ?Sized>(
        &mut self,
        theta: &[T],
        alloc: &ValueAllocation<T>,
        rng: &mut R,
    ) -> Result<Vec<Vec<T>>> {
        if alloc.shots.len() != self.observable.num_terms() {
            return Err(Error::TermCount {
                expected: self.observable.num_terms(),
                actual: alloc.shots.len(),
            });
        }
        let state = self.circuit.apply(theta)?;
        Ok(alloc
            .shots
            .iter()
            .enumerate()
            .map(|(j, &r)| self.draw(&state, j, r, rng))
            .collect())
    }

    /// Outcomes at the `+π/2` and `−π/2` shifts, one list per shift term.
    pub fn measure_gradient<R: Rng + ?Sized>(
        &mut self,
        theta: &[T],
        k: usize,
        alloc: &GradientAllocation<T>,
        rng: &mut R,
    ) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
        let terms = self.shift_terms(k);
        if alloc.plus.len() != terms.len() || alloc.minus.len() != terms.len() {
            return Err(Error::TermCount {
                expected: terms.len(),
                actual: alloc.plus.len(),
            });
        }
        let half_pi = T::FRAC_PI_2();
        let shifted = self
            .circuit
            .gates_for_param(k)
            .into_iter()
            .map(|g| {
                Ok((
                    self.circuit.apply_shifted(theta, Some((g, half_pi)))?,
                    self.circuit.apply_shifted(theta, Some((g, -half_pi)))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let per_gate = self.observable.num_terms();
        let mut plus = Vec::with_capacity(terms.len());
        let mut minus = Vec::with_capacity(terms.len());
        for (idx, s) in terms.iter().enumerate() {
            let (sp, sm) = &shifted[idx / per_gate];
            plus.push(self.draw(sp, s.term, alloc.plus[idx], rng));
            minus.push(self.draw(sm, s.term, alloc.minus[idx], rng));
        }
        Ok((plus, minus))
    }

    /// Sample-mean value estimate; `None` when the allocation is empty.
    pub fn estimate_value<R: Rng + ?Sized>(
        &mut self,
        theta: &[T],
        alloc: &ValueAllocation<T>,
        rng: &mut R,
    ) -> Result<Option<Estimate<T>>> {
        if alloc.is_empty() {
            return Ok(None);
        }
        let samples = self.measure_value(theta, alloc, rng)?;
        estimate_sm_f(&samples, alloc).map(Some)
    }

    /// Sample-mean estimate of `∂_k f`; `None` when the allocation is empty.
    pub fn estimate_gradient<R: Rng + ?Sized>(
        &mut self,
        theta: &[T],
        k: usize,
        alloc: &GradientAllocation<T>,
        rng: &mut R,
    ) -> Result<Option<Estimate<T>>> {
        if alloc.is_empty() {
            return Ok(None);
        }
        let (plus, minus) = self.measure_gradient(theta, k, alloc, rng)?;
        estimate_sm_df(&plus, &minus, alloc).map(Some)
    }
}

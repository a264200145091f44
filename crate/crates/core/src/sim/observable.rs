use super::circuit::Circuit;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One term `V† D V` of an observable: a parameter-free basis change `V`
/// followed by a measurement that is diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTerm<T> {
    basis_change: Circuit,
    diagonal: Vec<T>,
    norm: T,
}

impl<T: Real> DiagonalTerm<T> {
    pub fn new(basis_change: Circuit, diagonal: Vec<T>) -> Result<Self> {
        if basis_change.num_params() != 0 {
            return Err(Error::ParameterizedBasisChange(basis_change.num_params()));
        }
        if diagonal.len() != basis_change.dim() {
            return Err(Error::DiagonalLength {
                expected: basis_change.dim(),
                actual: diagonal.len(),
            });
        }
        let norm = diagonal
            .iter()
            .fold(T::zero(), |acc, d| acc.max(d.abs()));
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::ZeroTerm);
        }
        Ok(Self {
            basis_change,
            diagonal,
            norm,
        })
    }

    /// Term measured directly in the computational basis.
    pub fn computational(num_qubits: usize, diagonal: Vec<T>) -> Result<Self> {
        Self::new(Circuit::new(num_qubits, 0)?, diagonal)
    }

    /// Measurement of a Pauli string built from I, X and Z. X factors are
    /// rotated to Z with a Hadamard.
    pub fn pauli(pauli: &PauliString) -> Result<Self> {
        let n = pauli.len();
        let mut basis = Circuit::new(n, 0)?;
        let mut mask = 0usize;
        for (q, p) in pauli.paulis().iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::Z => mask |= 1 << q,
                Pauli::X => {
                    basis.h(q)?;
                    mask |= 1 << q;
                }
                Pauli::Y => return Err(Error::UnsupportedBasis('Y')),
            }
        }
        let diagonal = (0..1usize << n)
            .map(|b| {
                if (b & mask).count_ones() % 2 == 0 {
                    T::one()
                } else {
                    -T::one()
                }
            })
            .collect();
        Self::new(basis, diagonal)
    }

    pub fn basis_change(&self) -> &Circuit {
        &self.basis_change
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    /// Spectral norm of the diagonal operator: `max |d_b|`.
    pub fn norm(&self) -> T {
        self.norm
    }

    pub fn num_qubits(&self) -> usize {
        self.basis_change.num_qubits()
    }

    pub fn is_computational(&self) -> bool {
        self.basis_change.gates().is_empty()
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(
            self.basis_change.clone(),
            self.diagonal.iter().map(|&d| d * factor).collect(),
        )
    }
}

/// `O = Σ_j V_j† D_j V_j` together with an upper bound on `‖O‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T> {
    terms: Vec<DiagonalTerm<T>>,
    norm_bound: T,
}

impl<T: Real> Observable<T> {
    /// The default norm bound is exact when every term is measured in the
    /// computational basis, and the triangle-inequality sum otherwise.
    pub fn new(terms: Vec<DiagonalTerm<T>>) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyObservable)?;
        let n = first.num_qubits();
        if let Some(t) = terms.iter().find(|t| t.num_qubits() != n) {
            return Err(Error::DimensionMismatch {
                circuit: n,
                observable: t.num_qubits(),
            });
        }
        let norm_bound = if terms.iter().all(DiagonalTerm::is_computational) {
            summed_diagonal(&terms)
                .iter()
                .fold(T::zero(), |acc, d| acc.max(d.abs()))
        } else {
            terms.iter().map(DiagonalTerm::norm).sum()
        };
        Ok(Self { terms, norm_bound })
    }

    /// Replace the norm bound, e.g. with a known spectral norm. The caller
    /// is responsible for it being a true upper bound.
    pub fn with_norm_bound(mut self, bound: T) -> Result<Self> {
        if !(bound > T::zero()) || !bound.is_finite() {
            return Err(Error::NonPositive {
                name: "norm_bound",
                value: bound.as_f64(),
            });
        }
        self.norm_bound = bound;
        Ok(self)
    }

    pub fn terms(&self) -> &[DiagonalTerm<T>] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.terms[0].num_qubits()
    }

    pub fn norm_bound(&self) -> T {
        self.norm_bound
    }

    pub fn term_norms(&self) -> Vec<T> {
        self.terms.iter().map(DiagonalTerm::norm).collect()
    }

    /// Merge all computational-basis terms into one. Terms with a basis
    /// change are kept as they are.
    pub fn merged(&self) -> Result<Self> {
        let (comp, rest): (Vec<_>, Vec<_>) = self
            .terms
            .iter()
            .cloned()
            .partition(DiagonalTerm::is_computational);
        if comp.len() <= 1 {
            return Ok(self.clone());
        }
        let mut terms = vec![DiagonalTerm::computational(
            self.num_qubits(),
            summed_diagonal(&comp),
        )?];
        terms.extend(rest);
        Self::new(terms)
    }
}

fn summed_diagonal<T: Real>(terms: &[DiagonalTerm<T>]) -> Vec<T> {
    let dim = terms[0].diagonal().len();
    (0..dim)
        .map(|b| terms.iter().map(|t| t.diagonal()[b]).sum())
        .collect()
}

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }
}

/// Tensor product of single-qubit Paulis. Entry `q` acts on qubit `q`, which is
/// bit `q` of the computational basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self(paulis)
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self(vec![Pauli::I; num_qubits])
    }

    /// `pauli` on each listed qubit, identity elsewhere.
    pub fn on(num_qubits: usize, qubits: &[usize], pauli: Pauli) -> Result<Self> {
        let mut ops = vec![Pauli::I; num_qubits];
        for &q in qubits {
            if q >= num_qubits {
                return Err(Error::QubitIndex { qubit: q, num_qubits });
            }
            ops[q] = pauli;
        }
        Ok(Self(ops))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(flip, phase_flip, y)`: qubits where the operator flips the
    /// bit (X or Y), picks up a sign on |1⟩ (Y or Z), and carries a Y.
    pub(crate) fn masks(&self) -> (usize, usize, usize) {
        let mut flip = 0;
        let mut sign = 0;
        let mut y = 0;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1usize << q;
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    y |= bit;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, y)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

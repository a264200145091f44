use num_complex::Complex;

use super::pauli::PauliString;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Gate set: parameterized Pauli rotations plus fixed H and CNOT.
///
/// `Rotation { pauli, param }` applies `exp(-i θ_param P / 2)`, so that the
/// two-point shift rule with shifts of ±π/2 is exact for every occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    Cnot { control: usize, target: usize },
    Rotation { pauli: PauliString, param: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_params: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        Ok(Self {
            num_qubits,
            num_params,
            gates: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        self.validate(&gate)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn h(&mut self, qubit: usize) -> Result<&mut Self> {
        self.push(Gate::H(qubit))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn rotation(&mut self, pauli: PauliString, param: usize) -> Result<&mut Self> {
        self.push(Gate::Rotation { pauli, param })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn validate(&self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::H(q) => self.check_qubit(*q),
            Gate::Cnot { control, target } => {
                self.check_qubit(*control)?;
                self.check_qubit(*target)?;
                if control == target {
                    return Err(Error::QubitIndex {
                        qubit: *target,
                        num_qubits: self.num_qubits,
                    });
                }
                Ok(())
            }
            Gate::Rotation { pauli, param } => {
                if pauli.len() != self.num_qubits {
                    return Err(Error::PauliLength {
                        expected: self.num_qubits,
                        actual: pauli.len(),
                    });
                }
                if *param >= self.num_params {
                    return Err(Error::ParameterIndex {
                        index: *param,
                        num_params: self.num_params,
                    });
                }
                Ok(())
            }
        }
    }

    /// Indices of the gates driven by parameter `k`.
    pub fn gates_for_param(&self, k: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match g {
                Gate::Rotation { param, .. } if *param == k => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Number of rotations sharing parameter `k`.
    pub fn multiplicity(&self, k: usize) -> usize {
        self.gates_for_param(k).len()
    }

    pub fn max_multiplicity(&self) -> usize {
        (0..self.num_params)
            .map(|k| self.multiplicity(k))
            .max()
            .unwrap_or(0)
    }

    /// `U(θ)|0…0⟩`.
    pub fn apply<T: Real>(&self, theta: &[T]) -> Result<StateVector<T>> {
        self.apply_shifted(theta, None)
    }

    /// `U(θ)|0…0⟩` with the angle of a single gate occurrence offset by
    /// `shift`. Used by the shift rule when a parameter drives several gates.
    pub fn apply_shifted<T: Real>(
        &self,
        theta: &[T],
        shift: Option<(usize, T)>,
    ) -> Result<StateVector<T>> {
        self.check_theta(theta)?;
        let mut state = StateVector::zero(self.num_qubits);
        self.run_on(&mut state, theta, shift);
        Ok(state)
    }

    /// Apply the gate sequence to an existing state in place.
    pub fn apply_to<T: Real>(&self, state: &mut StateVector<T>, theta: &[T]) -> Result<()> {
        self.check_theta(theta)?;
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                circuit: self.num_qubits,
                observable: state.num_qubits(),
            });
        }
        self.run_on(state, theta, None);
        Ok(())
    }

    pub(crate) fn check_theta<T>(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.num_params {
            return Err(Error::ParameterCount {
                expected: self.num_params,
                actual: theta.len(),
            });
        }
        Ok(())
    }

    fn run_on<T: Real>(&self, state: &mut StateVector<T>, theta: &[T], shift: Option<(usize, T)>) {
        let amps = state.amplitudes_mut();
        for (i, gate) in self.gates.iter().enumerate() {
            match gate {
                Gate::H(q) => apply_h(amps, *q),
                Gate::Cnot { control, target } => apply_cnot(amps, *control, *target),
                Gate::Rotation { pauli, param } => {
                    let mut angle = theta[*param];
                    if let Some((g, s)) = shift {
                        if g == i {
                            angle += s;
                        }
                    }
                    apply_rotation(amps, pauli, angle);
                }
            }
        }
    }
}

fn apply_h<T: Real>(amps: &mut [Complex<T>], q: usize) {
    let bit = 1usize << q;
    let s = T::FRAC_1_SQRT_2();
    for b in 0..amps.len() {
        if b & bit == 0 {
            let a0 = amps[b];
            let a1 = amps[b | bit];
            amps[b] = (a0 + a1) * s;
            amps[b | bit] = (a0 - a1) * s;
        }
    }
}

fn apply_cnot<T: Real>(amps: &mut [Complex<T>], control: usize, target: usize) {
    let c = 1usize << control;
    let t = 1usize << target;
    for b in 0..amps.len() {
        if b & c != 0 && b & t == 0 {
            amps.swap(b, b | t);
        }
    }
}

/// `ψ ← cos(θ/2) ψ − i sin(θ/2) P ψ`.
fn apply_rotation<T: Real>(amps: &mut [Complex<T>], pauli: &PauliString, angle: T) {
    let (flip, sign, y) = pauli.masks();
    let half = angle / T::lit(2.0);
    let (sin, cos) = half.sin_cos();
    // P|b⟩ = i^{#Y} (−1)^{popcount(b & sign)} |b ⊕ flip⟩
    let y_phase = match y.count_ones() % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    // −i · sin · (phase of P)
    let coeff = Complex::new(T::zero(), -sin) * y_phase;
    let parity = |b: usize| {
        if (b & sign).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        }
    };
    if flip == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a = *a * cos + *a * coeff * parity(b);
        }
        return;
    }
    let low = flip & flip.wrapping_neg();
    for b in 0..amps.len() {
        if b & low != 0 {
            continue;
        }
        let b2 = b ^ flip;
        let a = amps[b];
        let a2 = amps[b2];
        // (Pψ)[b] = phase(b2) ψ[b2]
        amps[b] = a * cos + a2 * coeff * parity(b2);
        amps[b2] = a2 * cos + a * coeff * parity(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Pauli;
    use approx::assert_abs_diff_eq;

    fn assert_amps(state: &StateVector<f64>, expected: &[(f64, f64)]) {
        for (a, &(re, im)) in state.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, im, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(1, 0).unwrap();
        let s = c.apply::<f64>(&[]).unwrap();
        assert_amps(&s, &[(1.0, 0.0), (0.0, 0.0)]);
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.rotation("X".parse().unwrap(), 0).unwrap();
        let s = c.apply(&[std::f64::consts::PI]).unwrap();
        assert_amps(&s, &[(0.0, 0.0), (0.0, -1.0)]);
    }

    #[test]
    fn bell_state() {
        let mut c = Circuit::new(2, 0).unwrap();
        c.h(0).unwrap().cnot(0, 1).unwrap();
        let s = c.apply::<f64>(&[]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(&s, &[(r, 0.0), (0.0, 0.0), (0.0, 0.0), (r, 0.0)]);
    }

    #[test]
    fn ry_and_rz_match_closed_forms() {
        // Ry(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩
        let t = 0.7_f64;
        let mut c = Circuit::new(1, 1).unwrap();
        c.rotation("Y".parse().unwrap(), 0).unwrap();
        let s = c.apply(&[t]).unwrap();
        assert_amps(&s, &[((t / 2.0).cos(), 0.0), ((t / 2.0).sin(), 0.0)]);

        // H then Rz(θ): (e^{-iθ/2}|0⟩ + e^{iθ/2}|1⟩)/√2
        let mut c = Circuit::new(1, 1).unwrap();
        c.h(0).unwrap().rotation("Z".parse().unwrap(), 0).unwrap();
        let s = c.apply(&[t]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(
            &s,
            &[
                (r * (t / 2.0).cos(), -r * (t / 2.0).sin()),
                (r * (t / 2.0).cos(), r * (t / 2.0).sin()),
            ],
        );
    }

    #[test]
    fn zz_rotation_on_plus_plus() {
        // exp(-iθ ZZ/2)|++⟩: phases e^{-iθ/2} on even parity, e^{iθ/2} on odd.
        let t = 1.3_f64;
        let mut c = Circuit::new(2, 1).unwrap();
        c.h(0).unwrap().h(1).unwrap();
        c.rotation(PauliString::on(2, &[0, 1], Pauli::Z).unwrap(), 0)
            .unwrap();
        let s = c.apply(&[t]).unwrap();
        let (sn, cs) = (t / 2.0).sin_cos();
        assert_amps(
            &s,
            &[
                (0.5 * cs, -0.5 * sn),
                (0.5 * cs, 0.5 * sn),
                (0.5 * cs, 0.5 * sn),
                (0.5 * cs, -0.5 * sn),
            ],
        );
    }

    #[test]
    fn rejects_bad_gates_and_theta() {
        let mut c = Circuit::new(2, 1).unwrap();
        assert!(c.h(2).is_err());
        assert!(c.cnot(1, 1).is_err());
        assert!(c.rotation("X".parse().unwrap(), 0).is_err());
        assert!(c.rotation("XI".parse().unwrap(), 1).is_err());
        assert!(matches!(
            c.apply::<f64>(&[]),
            Err(Error::ParameterCount { expected: 1, actual: 0 })
        ));
        assert!(Circuit::new(0, 0).is_err());
        assert!(Circuit::new(13, 0).is_err());
    }

    #[test]
    fn multiplicity_counts_shared_parameters() {
        let mut c = Circuit::new(2, 2).unwrap();
        c.rotation("XI".parse().unwrap(), 0).unwrap();
        c.rotation("IX".parse().unwrap(), 0).unwrap();
        c.rotation("ZZ".parse().unwrap(), 1).unwrap();
        assert_eq!(c.gates_for_param(0), vec![0, 1]);
        assert_eq!(c.multiplicity(1), 1);
        assert_eq!(c.max_multiplicity(), 2);
    }
}

//! Parameterized two-qubit gates and their compilation to Pauli rotations.
//!
//! Every gate is a product of rotations `exp(i·k·θ_slot·P)` with a Pauli
//! string `P` and a fixed real factor `k`:
//!
//! * `N(a, b, c) = exp(i(a XX + b YY + c ZZ))`, three commuting rotations.
//! * `P(n, m) = CRX(m) · CRZ(n)` with control `src` and target `sink`, where
//!   `CR_A(θ) = exp(−iθ/4 A_t) · exp(iθ/4 Z_c A_t)` applies `exp(−iθ/2 A_t)`
//!   when the control is `|1⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::operators::{i_pow, Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    N,
    P,
}

impl GateKind {
    pub fn n_params(self) -> usize {
        match self {
            GateKind::N => 3,
            GateKind::P => 2,
        }
    }
}

/// One gate of a circuit. For `P` gates `qubits = [src, sink]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateInstruction {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub slots: Vec<usize>,
}

impl GateInstruction {
    pub fn n(q1: usize, q2: usize, slots: [usize; 3]) -> Self {
        Self { kind: GateKind::N, qubits: [q1, q2], slots: slots.to_vec() }
    }

    pub fn p(src: usize, sink: usize, slots: [usize; 2]) -> Self {
        Self { kind: GateKind::P, qubits: [src, sink], slots: slots.to_vec() }
    }

    pub fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        let [a, b] = self.qubits;
        for q in [a, b] {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, n_qubits });
            }
        }
        if a == b {
            return Err(Error::InvalidArgument(format!("gate acts twice on qubit {a}")));
        }
        if self.slots.len() != self.kind.n_params() {
            return Err(Error::LengthMismatch { expected: self.kind.n_params(), got: self.slots.len() });
        }
        if let Some(&s) = self.slots.iter().find(|&&s| s >= n_params) {
            return Err(Error::InvalidArgument(format!("slot {s} outside parameter vector of length {n_params}")));
        }
        Ok(())
    }

    /// The rotations realizing this gate, in application order.
    pub fn rotations(&self, n_qubits: usize) -> Result<Vec<Rotation>> {
        let [a, b] = self.qubits;
        let two = |pa: Pauli, pb: Pauli| PauliString::from_ops(n_qubits, [(a, pa), (b, pb)]);
        let one = |p: Pauli| PauliString::single(n_qubits, b, p);
        Ok(match self.kind {
            GateKind::N => vec![
                Rotation { pauli: two(Pauli::X, Pauli::X)?, factor: 1.0, slot: self.slots[0] },
                Rotation { pauli: two(Pauli::Y, Pauli::Y)?, factor: 1.0, slot: self.slots[1] },
                Rotation { pauli: two(Pauli::Z, Pauli::Z)?, factor: 1.0, slot: self.slots[2] },
            ],
            GateKind::P => vec![
                Rotation { pauli: one(Pauli::Z)?, factor: -0.25, slot: self.slots[0] },
                Rotation { pauli: two(Pauli::Z, Pauli::Z)?, factor: 0.25, slot: self.slots[0] },
                Rotation { pauli: one(Pauli::X)?, factor: -0.25, slot: self.slots[1] },
                Rotation { pauli: two(Pauli::Z, Pauli::X)?, factor: 0.25, slot: self.slots[1] },
            ],
        })
    }
}

/// `exp(i · factor · θ[slot] · pauli)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub pauli: PauliString,
    pub factor: f64,
    pub slot: usize,
}

/// A gate list lowered to rotations, ready for repeated execution.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    n_qubits: usize,
    n_params: usize,
    rotations: Vec<Rotation>,
}

impl CompiledCircuit {
    pub fn new(n_qubits: usize, n_params: usize, gates: &[GateInstruction]) -> Result<Self> {
        let mut rotations = Vec::with_capacity(4 * gates.len());
        for g in gates {
            g.validate(n_qubits, n_params)?;
            rotations.extend(g.rotations(n_qubits)?);
        }
        Ok(Self { n_qubits, n_params, rotations })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    /// Per-rotation angles `factor · θ[slot]`.
    pub fn angles(&self, params: &[f64]) -> Result<Vec<f64>> {
        if params.len() != self.n_params {
            return Err(Error::LengthMismatch { expected: self.n_params, got: params.len() });
        }
        Ok(self.rotations.iter().map(|r| r.factor * params[r.slot]).collect())
    }

    pub fn apply(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        let angles = self.angles(params)?;
        self.apply_angles(state, &angles)
    }

    pub fn apply_angles(&self, state: &mut StateVector, angles: &[f64]) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: state.n_qubits() });
        }
        if angles.len() != self.rotations.len() {
            return Err(Error::LengthMismatch { expected: self.rotations.len(), got: angles.len() });
        }
        for (r, &phi) in self.rotations.iter().zip(angles) {
            rotate(state.amplitudes_mut(), &r.pauli, phi);
        }
        Ok(())
    }
}

/// In-place `amps ← exp(iφP) · amps`.
pub(crate) fn rotate(amps: &mut [Complex64], p: &PauliString, phi: f64) {
    if phi == 0.0 {
        return;
    }
    let (s, c) = phi.sin_cos();
    let z = p.z_mask() as usize;
    let x = p.x_mask() as usize;
    if x == 0 {
        let plus = Complex64::new(c, s);
        let minus = Complex64::new(c, -s);
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= if (i & z).count_ones().is_multiple_of(2) { plus } else { minus };
        }
        return;
    }
    // P|i⟩ = i^{|x∧z|} (−1)^{|i∧z|} |i⊕x⟩
    let base = i_pow((p.x_mask() & p.z_mask()).count_ones()) * Complex64::new(0.0, s);
    let low = x & x.wrapping_neg();
    for i in 0..amps.len() {
        if i & low != 0 {
            continue;
        }
        let j = i ^ x;
        let si = if (i & z).count_ones().is_multiple_of(2) { base } else { -base };
        let sj = if (j & z).count_ones().is_multiple_of(2) { base } else { -base };
        let (ai, aj) = (amps[i], amps[j]);
        amps[i] = ai * c + sj * aj;
        amps[j] = aj * c + si * ai;
    }
}

/// `N(θi, θj, θk) = exp[i(θi XX + θj YY + θk ZZ)]` on `(q1, q2)`.
pub fn apply_n_gate(state: &mut StateVector, q1: usize, q2: usize, theta: [f64; 3]) -> Result<()> {
    apply_gate(state, &GateInstruction::n(q1, q2, [0, 1, 2]), &theta)
}

/// Controlled-`R_Z(θn)` then controlled-`R_X(θm)`, control `src`, target `sink`.
pub fn apply_p_gate(state: &mut StateVector, src: usize, sink: usize, theta: [f64; 2]) -> Result<()> {
    apply_gate(state, &GateInstruction::p(src, sink, [0, 1]), &theta)
}

pub fn apply_gate(state: &mut StateVector, gate: &GateInstruction, params: &[f64]) -> Result<()> {
    let n = state.n_qubits();
    gate.validate(n, params.len())?;
    for r in gate.rotations(n)? {
        rotate(state.amplitudes_mut(), &r.pauli, r.factor * params[r.slot]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angles_are_identity() {
        let amps: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 0.5 - i as f64)).collect();
        let mut s = StateVector::normalized(amps).unwrap();
        let before = s.clone();
        apply_n_gate(&mut s, 0, 2, [0.0; 3]).unwrap();
        apply_p_gate(&mut s, 1, 0, [0.0; 2]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn zz_quarter_turn_on_ground() {
        let mut s = StateVector::zero(2).unwrap();
        apply_n_gate(&mut s, 0, 1, [0.0, 0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let a = s.amplitudes()[0];
        assert!((a - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn p_gate_acts_only_when_control_set() {
        let mut s = StateVector::basis(2, 0).unwrap();
        apply_p_gate(&mut s, 1, 0, [0.7, 1.3]).unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // control (qubit 1) set, θm = π flips the target up to phase
        let mut s = StateVector::basis(2, 0b10).unwrap();
        apply_p_gate(&mut s, 1, 0, [0.0, std::f64::consts::PI]).unwrap();
        assert!((s.amplitudes()[0b11].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_gates_are_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(apply_n_gate(&mut s, 0, 0, [0.1; 3]).is_err());
        assert!(matches!(apply_p_gate(&mut s, 0, 2, [0.1; 2]), Err(Error::IndexOutOfRange { .. })));
    }
}

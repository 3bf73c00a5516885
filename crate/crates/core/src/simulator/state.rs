use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::PauliSum;

/// Normalization tolerance for states handed to the simulator.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest register the statevector engine accepts.
pub const MAX_SIM_QUBITS: usize = 24;

/// Dense statevector; amplitude index bit `q` is the state of qubit `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::RegisterTooLarge { n_qubits, limit: MAX_SIM_QUBITS });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::default(); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes_unchecked(amps)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(s)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::from_amplitudes_unchecked(amps)?;
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for a in &mut s.amps {
            *a /= norm;
        }
        Ok(s)
    }

    fn from_amplitudes_unchecked(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::RegisterTooLarge { n_qubits, limit: MAX_SIM_QUBITS });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Swap qubits `q ↔ perm(q)` for a permutation of the register.
    pub fn permute_qubits(&self, perm: impl Fn(usize) -> usize) -> Self {
        let targets: Vec<usize> = (0..self.n_qubits).map(&perm).collect();
        let mut amps = vec![Complex64::default(); self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (q, &t) in targets.iter().enumerate() {
                if i >> q & 1 == 1 {
                    j |= 1 << t;
                }
            }
            amps[j] = *a;
        }
        Self { n_qubits: self.n_qubits, amps }
    }
}

/// Hermiticity tolerance for observables passed to [`expectation`].
pub const OBSERVABLE_TOLERANCE: f64 = 1e-10;

/// `⟨ψ|O|ψ⟩` for a Hermitian Pauli sum.
pub fn expectation(state: &StateVector, obs: &PauliSum) -> Result<f64> {
    if obs.n_qubits() != state.n_qubits() {
        return Err(Error::LengthMismatch { expected: state.n_qubits(), got: obs.n_qubits() });
    }
    let dev = obs.hermiticity_error();
    if dev > OBSERVABLE_TOLERANCE {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let amps = state.amplitudes();
    let mut total = 0.0;
    for (p, c) in obs.terms() {
        let value: f64 = if p.is_diagonal() {
            amps.iter().enumerate().map(|(i, a)| p.z_sign(i) * a.norm_sqr()).sum()
        } else {
            amps.iter()
                .enumerate()
                .map(|(i, a)| {
                    let (ph, j) = p.apply_to_basis(i);
                    (amps[j].conj() * ph * a).re
                })
                .sum()
        };
        total += c.re * value;
    }
    Ok(total)
}

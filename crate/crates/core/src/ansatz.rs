//! The spin-symmetric pooling circuit and its Z-observable basis.
//!
//! Each spin sector (α on qubits `0..n_orb`, β on `n_orb..2·n_orb`) runs the
//! same gate pattern with the same parameter slots. A level over `k` active
//! qubits applies a ring of N gates (a single N gate when `k = 2`) and then
//! P gates on the pairs `(q_{2j}, q_{2j+1})`, after which `q_{2j+1}` is
//! dropped from the active list; an odd last qubit is carried over. Levels
//! repeat while more than `keep` qubits are active. A final level at `keep`
//! qubits applies the same N and P layers without dropping anything, and the
//! remaining qubits are the surviving (measured) ones.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::operators::{PauliString, PauliSum};
use crate::simulator::{CompiledCircuit, Counts, GateInstruction, StateVector};

/// Default number of surviving qubits per sector.
pub const DEFAULT_KEEP: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Active α qubits at the start of the level.
    pub active: Vec<usize>,
    pub n_layer: Vec<GateInstruction>,
    pub p_layer: Vec<GateInstruction>,
    /// `(pooled pair, kept qubit)` for the α sector; β mirrors it.
    pub pool_map: Vec<([usize; 2], usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    pub n_orb: usize,
    pub keep: usize,
    pub levels: Vec<Level>,
    pub param_count: usize,
    /// Surviving qubits of the α and β sectors.
    pub surviving: [Vec<usize>; 2],
}

/// Build the template with the default of two surviving qubits per sector.
pub fn build_siqnn(n_orb: usize) -> Result<CircuitTemplate> {
    build_siqnn_with_keep(n_orb, DEFAULT_KEEP)
}

pub fn build_siqnn_with_keep(n_orb: usize, keep: usize) -> Result<CircuitTemplate> {
    if n_orb < 2 {
        return Err(Error::InvalidArgument(format!("n_orb must be at least 2, got {n_orb}")));
    }
    if keep < 2 {
        return Err(Error::InvalidArgument(format!("keep must be at least 2, got {keep}")));
    }
    let shift = |q: usize| q + n_orb;
    let mut next_slot = 0usize;
    let mut slot = || {
        next_slot += 1;
        next_slot - 1
    };
    let mut active: Vec<usize> = (0..n_orb).collect();
    let mut levels = Vec::new();
    loop {
        let k = active.len();
        let last = k <= keep;
        let mut n_layer = Vec::new();
        let pairs: Vec<(usize, usize)> = if k == 2 {
            vec![(active[0], active[1])]
        } else {
            (0..k).map(|i| (active[i], active[(i + 1) % k])).collect()
        };
        for (a, b) in pairs {
            let s = [slot(), slot(), slot()];
            n_layer.push(GateInstruction::n(a, b, s));
            n_layer.push(GateInstruction::n(shift(a), shift(b), s));
        }
        let mut p_layer = Vec::new();
        let mut pool_map = Vec::new();
        for j in 0..k / 2 {
            let (kept, src) = (active[2 * j], active[2 * j + 1]);
            let s = [slot(), slot()];
            p_layer.push(GateInstruction::p(src, kept, s));
            p_layer.push(GateInstruction::p(shift(src), shift(kept), s));
            pool_map.push(([kept, src], kept));
        }
        let start = active.clone();
        if !last {
            active = active.iter().step_by(2).copied().collect();
        }
        levels.push(Level { active: start, n_layer, p_layer, pool_map });
        if last {
            break;
        }
    }
    let param_count = next_slot;
    let beta = active.iter().map(|&q| shift(q)).collect();
    Ok(CircuitTemplate { n_orb, keep, levels, param_count, surviving: [active, beta] })
}

/// `8(n_orb − 1) − 3`, valid for powers of two.
pub fn param_count_formula(n_orb: usize) -> Result<usize> {
    if n_orb < 2 || !n_orb.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("parameter-count formula needs a power of two ≥ 2, got {n_orb}")));
    }
    Ok(8 * (n_orb - 1) - 3)
}

impl CircuitTemplate {
    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// Gates in application order.
    pub fn gates(&self) -> Vec<GateInstruction> {
        self.levels.iter().flat_map(|l| l.n_layer.iter().chain(&l.p_layer)).cloned().collect()
    }

    pub fn compile(&self) -> Result<CompiledCircuit> {
        CompiledCircuit::new(self.n_qubits(), self.param_count, &self.gates())
    }

    /// Qubit image under the α ↔ β exchange.
    pub fn spin_swap(&self, q: usize) -> usize {
        if q < self.n_orb {
            q + self.n_orb
        } else {
            q - self.n_orb
        }
    }

    pub fn surviving_qubits(&self) -> Vec<usize> {
        self.surviving.iter().flatten().copied().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("template serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Spin-swap-symmetric Z observables on the surviving qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableBasis {
    n_qubits: usize,
    terms: Vec<PauliSum>,
    /// Qubit tuples of each term's representative string.
    supports: Vec<Vec<usize>>,
    /// Value of each term on every computational basis state.
    diagonals: Vec<Vec<f64>>,
}

pub fn build_observable_basis(template: &CircuitTemplate) -> Result<ObservableBasis> {
    let n_qubits = template.n_qubits();
    let qubits = template.surviving_qubits();
    let m = qubits.len();
    let mut orbits: BTreeSet<(usize, Vec<usize>, Vec<usize>)> = BTreeSet::new();
    for mask in 0u64..1 << m {
        let subset: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| qubits[b]).collect();
        let mut image: Vec<usize> = subset.iter().map(|&q| template.spin_swap(q)).collect();
        image.sort_unstable();
        let (rep, other) = if subset <= image { (subset, image) } else { (image, subset) };
        orbits.insert((rep.len(), rep, other));
    }
    let mut terms = Vec::with_capacity(orbits.len());
    let mut supports = Vec::with_capacity(orbits.len());
    for (_, rep, other) in orbits {
        let a = PauliString::z_on(n_qubits, rep.iter().copied())?;
        let b = PauliString::z_on(n_qubits, other.iter().copied())?;
        let mut sum = PauliSum::from_string(a, Complex64::new(1.0, 0.0));
        if b != a {
            sum.add_term(b, Complex64::new(1.0, 0.0));
        }
        terms.push(sum);
        supports.push(rep);
    }
    let dim = 1usize << n_qubits;
    let diagonals =
        terms.iter().map(|t| (0..dim).map(|i| t.terms().map(|(p, c)| c.re * p.z_sign(i)).sum()).collect()).collect();
    Ok(ObservableBasis { n_qubits, terms, supports, diagonals })
}

impl ObservableBasis {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[PauliSum] {
        &self.terms
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn diagonals(&self) -> &[Vec<f64>] {
        &self.diagonals
    }

    /// `Σ_i w_i O_i` as a Pauli sum.
    pub fn weighted(&self, w: &[f64]) -> Result<PauliSum> {
        if w.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: w.len() });
        }
        let mut out = PauliSum::zero(self.n_qubits);
        for (t, &wi) in self.terms.iter().zip(w) {
            for (p, c) in t.terms() {
                out.add_term(*p, c * wi);
            }
        }
        Ok(out.simplify())
    }

    /// Diagonal of `Σ_i w_i O_i`.
    pub fn weighted_diagonal(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n_qubits];
        for (d, &wi) in self.diagonals.iter().zip(w) {
            for (o, v) in out.iter_mut().zip(d) {
                *o += wi * v;
            }
        }
        out
    }

    /// Exact expectation of every term.
    pub fn expectations(&self, state: &StateVector) -> Result<Vec<f64>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: state.n_qubits() });
        }
        let probs = state.probabilities();
        Ok(self.diagonals.iter().map(|d| d.iter().zip(&probs).map(|(a, b)| a * b).sum()).collect())
    }

    /// Plug-in estimate of every term from one set of Z-basis counts.
    pub fn estimate(&self, counts: &Counts) -> Result<Vec<f64>> {
        if counts.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: counts.n_qubits() });
        }
        let shots = counts.shots() as f64;
        Ok(self.diagonals.iter().map(|d| counts.iter().map(|(i, n)| d[i] * n as f64).sum::<f64>() / shots).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_counts() {
        for (n, expected) in [(2, 5), (4, 21), (8, 53), (16, 117), (5, 35)] {
            assert_eq!(build_siqnn(n).unwrap().param_count, expected, "n_orb={n}");
        }
    }

    #[test]
    fn formula_rejects_non_powers_of_two() {
        assert_eq!(param_count_formula(4).unwrap(), 21);
        assert!(param_count_formula(5).is_err());
    }

    #[test]
    fn odd_sector_carries_last_qubit() {
        let t = build_siqnn(5).unwrap();
        assert_eq!(t.surviving, [vec![0, 4], vec![5, 9]]);
        assert_eq!(t.levels.len(), 3);
        assert_eq!(t.levels[1].active, vec![0, 2, 4]);
    }

    #[test]
    fn sectors_share_slots() {
        let t = build_siqnn(4).unwrap();
        for l in &t.levels {
            for pair in l.n_layer.chunks(2).chain(l.p_layer.chunks(2)) {
                assert_eq!(pair[0].slots, pair[1].slots);
                assert_eq!(pair[1].qubits, pair[0].qubits.map(|q| q + 4));
            }
        }
    }

    #[test]
    fn observable_basis_for_two_survivors() {
        let t = build_siqnn(4).unwrap();
        let b = build_observable_basis(&t).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.terms()[0], PauliSum::identity(8));
        assert_eq!(b.supports()[1], vec![0]);
        assert_eq!(b.terms()[1].len(), 2);
    }

    #[test]
    fn hash_is_stable_and_json_round_trips() {
        let t = build_siqnn(4).unwrap();
        assert_eq!(t.hash(), build_siqnn(4).unwrap().hash());
        assert_ne!(t.hash(), build_siqnn(2).unwrap().hash());
        assert_eq!(CircuitTemplate::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}

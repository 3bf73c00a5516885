//! Computational-basis sampling and shot-based estimators.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::operators::PauliSum;
use crate::rng::rng_from;

/// Outcome histogram of a Z-basis measurement, indexed by basis state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    n_qubits: usize,
    counts: Vec<u64>,
    shots: u64,
}

impl Counts {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    /// Nonzero `(index, count)` pairs in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c))
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.get(index) as f64 / self.shots as f64
    }
}

/// Draw `n_shots` outcomes from `|amplitude|²`, seeded.
pub fn sample_z_basis(state: &StateVector, n_shots: u64, seed: u64) -> Result<Counts> {
    let mut rng = rng_from(seed);
    sample_probabilities(&state.probabilities(), state.n_qubits(), n_shots, &mut rng)
}

/// Multinomial draw via a chain of conditional binomials.
pub fn sample_probabilities<R: Rng + ?Sized>(
    probs: &[f64],
    n_qubits: usize,
    n_shots: u64,
    rng: &mut R,
) -> Result<Counts> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n_shots;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || p >= mass {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(Counts { n_qubits, counts, shots: n_shots })
}

/// Plug-in estimate of an all-Z observable: `Σ_i c_i · mean(±1 of P_i)`.
pub fn estimate_z_observable(counts: &Counts, obs: &PauliSum) -> Result<f64> {
    let terms = z_term_means(counts, obs)?;
    Ok(obs.terms().zip(terms).map(|((_, c), m)| c.re * m).sum())
}

/// Shot mean of every term's ±1 eigenvalue, in the sum's term order.
pub fn z_term_means(counts: &Counts, obs: &PauliSum) -> Result<Vec<f64>> {
    if obs.n_qubits() != counts.n_qubits {
        return Err(Error::LengthMismatch { expected: counts.n_qubits, got: obs.n_qubits() });
    }
    if let Some((p, _)) = obs.terms().find(|(p, _)| !p.is_diagonal()) {
        return Err(Error::NotDiagonal(p.label()));
    }
    let total = counts.shots as f64;
    Ok(obs.terms().map(|(p, _)| counts.iter().map(|(i, n)| p.z_sign(i) * n as f64).sum::<f64>() / total).collect())
}

//! Model error against measurement budget, next to direct energy measurement.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::mean_sem;
use crate::error::{Error, Result};
use crate::model::HybridModel;
use crate::operators::{qwc_group, Pauli, PauliSum, QwcGroup};
use crate::rng::derive_seed;
use crate::simulator::{sample_z_basis, StateVector};
use crate::spectra::Dataset;
use crate::training::{train_two_stage_shots, TrainConfig, TrainSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    /// Trained and evaluated with `N` shots per model output.
    Trained,
    /// Trained with `N` shots, evaluated with the high budget.
    TrainedEvalHigh,
    /// Ground-state energy with every Pauli term measured `N` times.
    UpperBound,
    /// Ground-state energy with `N` shots split evenly over the qwc groups.
    Qwc,
    /// Noiselessly trained model evaluated with `N` shots.
    Checkpoint,
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curve::Trained => "trained",
            Curve::TrainedEvalHigh => "trained_eval_high",
            Curve::UpperBound => "upper_bound",
            Curve::Qwc => "qwc",
            Curve::Checkpoint => "checkpoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRow {
    pub curve: Curve,
    pub shots: u64,
    /// Physical units squared.
    pub mse: f64,
    pub sem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotStudyConfig {
    pub shots: Vec<u64>,
    /// Repetitions of every noisy evaluation.
    pub seeds: usize,
    pub seed: u64,
    pub high_shots: u64,
    /// Settings for training under shot noise; `None` skips those curves.
    pub train: Option<TrainConfig>,
}

impl Default for ShotStudyConfig {
    fn default() -> Self {
        Self {
            shots: vec![1_000, 3_000, 10_000, 30_000, 100_000],
            seeds: 20,
            seed: 0,
            high_shots: 100_000,
            train: None,
        }
    }
}

/// Test MSE in physical units of `model` when each output is estimated from
/// `shots` samples, as mean ± SEM over `seeds` repetitions.
pub fn checkpoint_mse(
    model: &HybridModel,
    ds: &Dataset,
    points: &[usize],
    shots: u64,
    seeds: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if points.is_empty() || seeds == 0 {
        return Err(Error::Empty("evaluation points or seeds".into()));
    }
    let r = ds.r_scaled();
    let y = ds.y_scaled();
    let factor = ds.scaling.mse_factor();
    let per_seed = (0..seeds)
        .map(|s| {
            let mut acc = 0.0;
            for &k in points {
                let pred = model.forward_shots(&ds.states[k], r[k], shots, derive_seed(seed, &[s as u64, k as u64]))?;
                acc += (pred - y[k]).powi(2);
            }
            Ok(acc / points.len() as f64 * factor)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_sem(&per_seed))
}

/// Single-shot variances of the energy estimators of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyVariance {
    /// `Σ_i c_i² (1 − ⟨P_i⟩²)` over non-identity terms.
    pub per_term: f64,
    /// `Var(H_g)` of every qwc group.
    pub groups: Vec<f64>,
}

impl EnergyVariance {
    /// Estimator MSE when every term gets `shots` samples of its own.
    pub fn upper_bound_mse(&self, shots: u64) -> f64 {
        self.per_term / shots as f64
    }

    /// Estimator MSE when `shots` are split evenly (rounded down) over groups.
    pub fn qwc_mse(&self, shots: u64) -> f64 {
        let per_group = (shots / self.groups.len() as u64).max(1) as f64;
        self.groups.iter().sum::<f64>() / per_group
    }
}

fn real_expectation(op: &PauliSum, psi: &StateVector) -> (f64, f64) {
    let a = psi.amplitudes();
    let b = op.apply(a);
    let mean: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    let sq: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    (mean.re, sq)
}

pub fn energy_variances(h: &PauliSum, groups: &[QwcGroup], psi: &StateVector) -> EnergyVariance {
    let mut per_term = 0.0;
    for (p, c) in h.terms() {
        if p.is_identity() {
            continue;
        }
        let (m, _) = real_expectation(&PauliSum::from_string(*p, Complex64::new(1.0, 0.0)), psi);
        per_term += c.norm_sqr() * (1.0 - m * m);
    }
    let groups = groups
        .iter()
        .map(|g| {
            let (m, sq) = real_expectation(&g.to_sum(), psi);
            (sq - m * m).max(0.0)
        })
        .collect();
    EnergyVariance { per_term, groups }
}

/// Apply the single-qubit rotations taking the group basis to Z.
fn rotate_to_z(psi: &StateVector, group: &QwcGroup) -> Result<StateVector> {
    let basis = group.basis();
    let mut amps = psi.amplitudes().to_vec();
    for q in 0..psi.n_qubits() {
        let op = basis.get(q);
        if op == Pauli::Y {
            for (i, a) in amps.iter_mut().enumerate() {
                if i >> q & 1 == 1 {
                    *a *= Complex64::new(0.0, -1.0);
                }
            }
        }
        if op == Pauli::X || op == Pauli::Y {
            let bit = 1usize << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a, b) = (amps[i], amps[i | bit]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
    }
    StateVector::from_amplitudes(amps)
}

/// One sampled energy estimate with `shots` split over the qwc groups.
pub fn sampled_qwc_energy(groups: &[QwcGroup], psi: &StateVector, shots: u64, seed: u64) -> Result<f64> {
    let per_group = (shots / groups.len() as u64).max(1);
    let mut energy = 0.0;
    for (gi, g) in groups.iter().enumerate() {
        let counts = sample_z_basis(&rotate_to_z(psi, g)?, per_group, derive_seed(seed, &[gi as u64]))?;
        for (p, c) in &g.terms {
            let support = p.support();
            let mean = counts
                .iter()
                .map(|(i, n)| if (i as u64 & support).count_ones().is_multiple_of(2) { n as f64 } else { -(n as f64) })
                .sum::<f64>()
                / per_group as f64;
            energy += c.re * mean;
        }
    }
    Ok(energy)
}

/// All curves over `config.shots`; errors are averaged over the test points
/// (the complement of `train`). `hamiltonians` are aligned with the dataset.
pub fn shot_study(
    model: &HybridModel,
    ds: &Dataset,
    train: &[usize],
    hamiltonians: &[PauliSum],
    config: &ShotStudyConfig,
) -> Result<Vec<ShotRow>> {
    if hamiltonians.len() != ds.len() {
        return Err(Error::LengthMismatch { expected: ds.len(), got: hamiltonians.len() });
    }
    let test: Vec<usize> = (0..ds.len()).filter(|k| !train.contains(k)).collect();
    let variances: Vec<EnergyVariance> =
        test.iter().map(|&k| energy_variances(&hamiltonians[k], &qwc_group(&hamiltonians[k]), &ds.states[k])).collect();
    let r = ds.r_scaled();
    let y = ds.y_scaled();
    let mut rows = Vec::new();
    for (si, &n) in config.shots.iter().enumerate() {
        let seed = derive_seed(config.seed, &[si as u64]);
        let (mse, sem) = checkpoint_mse(model, ds, &test, n, config.seeds, seed)?;
        rows.push(ShotRow { curve: Curve::Checkpoint, shots: n, mse, sem });
        let nt = test.len() as f64;
        let ub = variances.iter().map(|v| v.upper_bound_mse(n)).sum::<f64>() / nt;
        let qwc = variances.iter().map(|v| v.qwc_mse(n)).sum::<f64>() / nt;
        rows.push(ShotRow { curve: Curve::UpperBound, shots: n, mse: ub, sem: 0.0 });
        rows.push(ShotRow { curve: Curve::Qwc, shots: n, mse: qwc, sem: 0.0 });
        if let Some(tc) = &config.train {
            let data = TrainSet::new(
                train.iter().map(|&k| ds.states[k].clone()).collect(),
                train.iter().map(|&k| r[k]).collect(),
                train.iter().map(|&k| y[k]).collect(),
            )?;
            let run = train_two_stage_shots(
                model.template(),
                &data,
                tc,
                ds.scaling.mse_factor(),
                derive_seed(seed, &[1]),
                n,
            )?;
            let (mse, sem) = checkpoint_mse(&run.siqnn_nn, ds, &test, n, config.seeds, derive_seed(seed, &[2]))?;
            rows.push(ShotRow { curve: Curve::Trained, shots: n, mse, sem });
            let (mse, sem) =
                checkpoint_mse(&run.siqnn_nn, ds, &test, config.high_shots, config.seeds, derive_seed(seed, &[3]))?;
            rows.push(ShotRow { curve: Curve::TrainedEvalHigh, shots: n, mse, sem });
        }
    }
    rows.sort_by(|a, b| a.curve.cmp(&b.curve).then(a.shots.cmp(&b.shots)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::expectation;

    fn random_state(n: usize, seed: u64) -> StateVector {
        use rand::Rng;
        let mut rng = crate::rng::rng_from(seed);
        let amps =
            (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn qwc_sampling_matches_exact_mean_and_variance() {
        let h = PauliSum::from_labels(&[(0.5, "XX"), (-0.3, "YY"), (0.2, "ZI"), (0.7, "XI"), (0.1, "II")]).unwrap();
        let groups = qwc_group(&h);
        let psi = random_state(2, 3);
        let exact = expectation(&psi, &h).unwrap();
        let v = energy_variances(&h, &groups, &psi);
        let shots = 400;
        let runs = 2000;
        let est: Vec<f64> = (0..runs).map(|s| sampled_qwc_energy(&groups, &psi, shots, s).unwrap()).collect();
        let (mean, sem) = mean_sem(&est);
        assert!((mean - exact).abs() < 4.0 * sem, "{mean} vs {exact}");
        let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let predicted = v.qwc_mse(shots);
        assert!((var / predicted - 1.0).abs() < 0.15, "{var} vs {predicted}");
    }

    #[test]
    fn single_term_groups_equal_upper_bound_times_group_count() {
        let h = PauliSum::from_labels(&[(0.5, "X"), (0.3, "Z")]).unwrap();
        let groups = qwc_group(&h);
        assert_eq!(groups.len(), 2);
        let v = energy_variances(&h, &groups, &random_state(1, 1));
        assert!((v.qwc_mse(1000) - 2.0 * v.upper_bound_mse(1000)).abs() < 1e-15);
    }
}

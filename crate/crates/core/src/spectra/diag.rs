//! Exact diagonalization in particle-number and `S_z` sectors.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    build_dipole_operator, build_qubit_hamiltonian, build_s2_operator, ActiveSpaceIntegrals, PauliSum,
};
use crate::simulator::StateVector;

/// Energies closer than this (Hartree) form one degenerate level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Largest register handled by sector diagonalization.
pub const SECTOR_QUBIT_LIMIT: usize = 14;

/// Matrix elements leaking out of a sector above this magnitude are an error.
const LEAK_TOLERANCE: f64 = 1e-10;

/// Basis-state filter: fixed electron number and/or fixed `2·S_z`.
///
/// `S_z` counts α electrons on qubits `0..n/2` and β on `n/2..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Sector {
    pub n_elec: Option<usize>,
    pub sz2: Option<i32>,
}

impl Sector {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn new(n_elec: usize, sz2: i32) -> Self {
        Self { n_elec: Some(n_elec), sz2: Some(sz2) }
    }

    /// Basis indices in the sector, ascending.
    pub fn indices(&self, n_qubits: usize) -> Result<Vec<usize>> {
        if n_qubits > SECTOR_QUBIT_LIMIT {
            return Err(Error::RegisterTooLarge { n_qubits, limit: SECTOR_QUBIT_LIMIT });
        }
        if self.sz2.is_some() && n_qubits % 2 == 1 {
            return Err(Error::InvalidArgument("S_z sectors need an even register".into()));
        }
        let half = n_qubits / 2;
        let alpha_mask = (1usize << half) - 1;
        let out: Vec<usize> = (0..1usize << n_qubits)
            .filter(|&i| {
                let n = i.count_ones() as i64;
                let na = (i & alpha_mask).count_ones() as i64;
                self.n_elec.is_none_or(|e| n == e as i64) && self.sz2.is_none_or(|s| na - (n - na) == s as i64)
            })
            .collect();
        if out.is_empty() {
            return Err(Error::EmptySector { n_elec: self.n_elec.unwrap_or(0), sz2: self.sz2.unwrap_or(0) });
        }
        Ok(out)
    }
}

/// Restriction of `op` to the span of `basis`.
pub fn sector_matrix(op: &PauliSum, basis: &[usize]) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << op.n_qubits();
    let mut pos = vec![usize::MAX; dim];
    for (k, &i) in basis.iter().enumerate() {
        pos[i] = k;
    }
    let d = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let mut leaked: HashMap<usize, Complex64> = HashMap::new();
    for (col, &i) in basis.iter().enumerate() {
        leaked.clear();
        for (p, c) in op.terms() {
            let (ph, j) = p.apply_to_basis(i);
            match pos[j] {
                usize::MAX => *leaked.entry(j).or_default() += c * ph,
                row => m[(row, col)] += c * ph,
            }
        }
        if let Some((j, _)) = leaked.iter().find(|(_, v)| v.norm() > LEAK_TOLERANCE) {
            return Err(Error::InvalidArgument(format!("operator maps basis state {i} outside the sector to {j}")));
        }
    }
    Ok(m)
}

/// Rotate a vector so its largest-magnitude entry (first on ties) is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    for (k, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() + 1e-12 {
            best = k;
        }
    }
    let a = v[best];
    if a.norm() == 0.0 {
        return;
    }
    let phase = a.conj() / a.norm();
    for x in v.iter_mut() {
        *x *= phase;
    }
}

/// Eigenpairs of a Hermitian matrix, ascending, columns phase-fixed.
pub fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(m.nrows(), order.len());
    for (c, &k) in order.iter().enumerate() {
        let mut col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        fix_phase(&mut col);
        vectors.set_column(c, &DVector::from_vec(col));
    }
    (values, vectors)
}

/// Eigen-decomposition of an operator restricted to a sector.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_qubits: usize,
    basis: Vec<usize>,
    pub energies: Vec<f64>,
    /// Columns in the sector basis.
    pub vectors: DMatrix<Complex64>,
}

pub fn diagonalize(h: &PauliSum, sector: Sector) -> Result<Spectrum> {
    let dev = h.hermiticity_error();
    if dev > LEAK_TOLERANCE {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let basis = sector.indices(h.n_qubits())?;
    let (energies, vectors) = eigh(&sector_matrix(h, &basis)?);
    Ok(Spectrum { n_qubits: h.n_qubits(), basis, energies, vectors })
}

impl Spectrum {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Eigenvector `j` in the full `2^n` space.
    pub fn embed(&self, j: usize) -> StateVector {
        embed(self.n_qubits, &self.basis, self.vectors.column(j).iter().copied())
    }

    /// `‖Hv − λv‖₂` evaluated in the full space.
    pub fn residual(&self, h: &PauliSum, j: usize) -> f64 {
        let v = self.embed(j);
        let hv = h.apply(v.amplitudes());
        hv.iter().zip(v.amplitudes()).map(|(a, b)| (a - b * self.energies[j]).norm_sqr()).sum::<f64>().sqrt()
    }
}

fn embed(n_qubits: usize, basis: &[usize], col: impl Iterator<Item = Complex64>) -> StateVector {
    let mut amps = vec![Complex64::default(); 1 << n_qubits];
    for (&i, a) in basis.iter().zip(col) {
        amps[i] = a;
    }
    StateVector::normalized(amps).expect("eigenvectors are normalized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinClass {
    Singlet,
    Triplet,
    Other,
}

/// Spin class from `⟨S²⟩`.
pub fn classify_s2(s2: f64) -> SpinClass {
    if s2.abs() < 0.1 {
        SpinClass::Singlet
    } else if (s2 - 2.0).abs() < 0.1 {
        SpinClass::Triplet
    } else {
        SpinClass::Other
    }
}

pub fn classify_state(state: &StateVector, s2: &PauliSum) -> Result<SpinClass> {
    Ok(classify_s2(crate::simulator::expectation(state, s2)?))
}

/// `√(Σ_c |⟨ψ_j|μ_c|ψ₀⟩|²)`
pub fn tdm_norm(psi0: &StateVector, psi_j: &StateVector, mu: &[PauliSum; 3]) -> f64 {
    mu.iter()
        .map(|m| {
            let v = m.apply(psi0.amplitudes());
            psi_j.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// States sharing an energy (within tolerance) and a spin class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub states: Vec<usize>,
    pub energy: f64,
    pub s2: f64,
    pub class: SpinClass,
}

/// Everything computed for one geometry.
#[derive(Debug, Clone)]
pub struct GeometrySpectrum {
    pub r: f64,
    pub n_elec: usize,
    pub spectrum: Spectrum,
    /// `⟨S²⟩` per retained state.
    pub s2: Vec<f64>,
    /// `⟨ψ_j|μ|ψ₀⟩` per retained state.
    pub tdm: Vec<[Complex64; 3]>,
    pub levels: Vec<Level>,
}

impl GeometrySpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.spectrum.energies[0]
    }

    pub fn ground_state(&self) -> StateVector {
        self.spectrum.embed(0)
    }

    /// Degeneracy-summed TDM norm of a level.
    pub fn level_tdm(&self, level: usize) -> f64 {
        self.levels[level].states.iter().flat_map(|&j| self.tdm[j].iter().map(|c| c.norm_sqr())).sum::<f64>().sqrt()
    }

    /// Sector-basis coefficients of every state in a level.
    pub(crate) fn level_vectors(&self, level: usize) -> Vec<Vec<Complex64>> {
        self.levels[level].states.iter().map(|&j| self.spectrum.vectors.column(j).iter().copied().collect()).collect()
    }
}

/// Options for [`analyze_geometry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    /// Only the lowest states are kept for labelling and tracking.
    pub max_states: usize,
    pub degeneracy_tolerance: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { max_states: 40, degeneracy_tolerance: DEGENERACY_TOLERANCE }
    }
}

/// Diagonalize one geometry in the `(n_elec, S_z = 0)` sector, make every
/// degenerate block spin-pure, and compute `⟨S²⟩` and transition dipoles.
pub fn analyze_geometry(ints: &ActiveSpaceIntegrals, opts: AnalysisOptions) -> Result<GeometrySpectrum> {
    let h = build_qubit_hamiltonian(ints)?;
    let s2_op = build_s2_operator(ints.n_orb)?;
    let mu = build_dipole_operator(ints)?;
    let sz2 = (ints.n_elec % 2) as i32;
    let mut spec = diagonalize(&h, Sector::new(ints.n_elec, sz2))?;
    let s2m = sector_matrix(&s2_op, spec.basis())?;
    let tol = opts.degeneracy_tolerance;

    let d = spec.len();
    let mut s2 = vec![0.0; d];
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && spec.energies[end] - spec.energies[end - 1] <= tol {
            end += 1;
        }
        let block = spec.vectors.columns(start, end - start).into_owned();
        let b = block.adjoint() * &s2m * &block;
        let (vals, u) = eigh(&b);
        let rotated = &block * u;
        for k in 0..end - start {
            let mut col: Vec<Complex64> = rotated.column(k).iter().copied().collect();
            fix_phase(&mut col);
            spec.vectors.set_column(start + k, &DVector::from_vec(col));
            s2[start + k] = vals[k];
        }
        start = end;
    }

    let keep = d.min(opts.max_states);
    // never split a degenerate block at the cut
    let keep = (keep..d).find(|&k| spec.energies[k] - spec.energies[k - 1] > tol).unwrap_or(d);
    spec.energies.truncate(keep);
    spec.vectors = spec.vectors.columns(0, keep).into_owned();
    s2.truncate(keep);

    let mu_m: Vec<DMatrix<Complex64>> = mu.iter().map(|m| sector_matrix(m, spec.basis())).collect::<Result<_>>()?;
    let v0 = spec.vectors.column(0).into_owned();
    let mu_v0: Vec<DVector<Complex64>> = mu_m.iter().map(|m| m * &v0).collect();
    let tdm = (0..keep)
        .map(|j| {
            let vj = spec.vectors.column(j);
            [0, 1, 2].map(|c| vj.dotc(&mu_v0[c]))
        })
        .collect();

    let mut levels: Vec<Level> = Vec::new();
    for j in 0..keep {
        let class = classify_s2(s2[j]);
        match levels.last_mut() {
            Some(l)
                if l.class == class && spec.energies[j] - spec.energies[*l.states.last().expect("nonempty")] <= tol =>
            {
                l.states.push(j)
            }
            _ => levels.push(Level { states: vec![j], energy: 0.0, s2: 0.0, class }),
        }
    }
    for l in &mut levels {
        let n = l.states.len() as f64;
        l.energy = l.states.iter().map(|&j| spec.energies[j]).sum::<f64>() / n;
        l.s2 = l.states.iter().map(|&j| s2[j]).sum::<f64>() / n;
    }
    Ok(GeometrySpectrum { r: ints.r, n_elec: ints.n_elec, spectrum: spec, s2, tdm, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_z_unrestricted() {
        let h = PauliSum::from_labels(&[(1.0, "Z")]).unwrap();
        let s = diagonalize(&h, Sector::all()).unwrap();
        assert_eq!(s.energies, vec![-1.0, 1.0]);
    }

    #[test]
    fn one_orbital_sector_energies() {
        let eps = -0.4;
        let ints = ActiveSpaceIntegrals::one_body(1, 1, 0.0, vec![eps]);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let mut all = Vec::new();
        for (n, sz) in [(0, 0), (1, 1), (1, -1), (2, 0)] {
            all.extend(diagonalize(&h, Sector::new(n, sz)).unwrap().energies);
        }
        all.sort_by(f64::total_cmp);
        let expected = [2.0 * eps, eps, eps, 0.0];
        for (a, b) in all.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_sector_is_an_error() {
        let h = PauliSum::identity(2);
        assert!(matches!(diagonalize(&h, Sector::new(3, 0)), Err(Error::EmptySector { .. })));
    }

    #[test]
    fn spin_classes() {
        assert_eq!(classify_s2(0.0), SpinClass::Singlet);
        assert_eq!(classify_s2(2.0), SpinClass::Triplet);
        assert_eq!(classify_s2(6.0), SpinClass::Other);
    }

    #[test]
    fn phase_fix_makes_largest_entry_positive() {
        let mut v = vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, -0.9)];
        fix_phase(&mut v);
        assert!((v[1] - Complex64::new(0.9, 0.0)).norm() < 1e-15);
    }
}

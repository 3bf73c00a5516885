//! Jordan-Wigner images of fermionic operators.
//!
//! Spin-orbital `(p, σ)` lives on qubit `p + σ·n_orb`: the α block occupies
//! qubits `0..n_orb`, the β block `n_orb..2·n_orb`, each ordered like the
//! orbitals of the bundle. An occupied spin-orbital is qubit state `|1⟩`.

use num_complex::Complex64;

use super::integrals::ActiveSpaceIntegrals;
use super::pauli::{Pauli, PauliString};
use super::sum::PauliSum;
use crate::error::{Error, Result};

/// Coefficient imaginary parts above this mean an inconsistent construction.
const HERMITIAN_TOLERANCE: f64 = 1e-10;

const HALF: Complex64 = Complex64::new(0.5, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// Qubit carrying orbital `p` with spin `beta`.
#[inline]
pub fn spin_orbital(n_orb: usize, p: usize, beta: bool) -> usize {
    p + if beta { n_orb } else { 0 }
}

/// `a†_p = ½(X_p − iY_p) ∏_{j<p} Z_j`.
pub fn jw_creation(p: usize, n_qubits: usize) -> Result<PauliSum> {
    ladder(p, n_qubits, -HALF_I)
}

/// `a_p = ½(X_p + iY_p) ∏_{j<p} Z_j`.
pub fn jw_annihilation(p: usize, n_qubits: usize) -> Result<PauliSum> {
    ladder(p, n_qubits, HALF_I)
}

fn ladder(p: usize, n_qubits: usize, y_coeff: Complex64) -> Result<PauliSum> {
    if p >= n_qubits {
        return Err(Error::IndexOutOfRange { index: p, n_qubits });
    }
    let chain = PauliString::z_on(n_qubits, 0..p)?;
    let x = chain.with(p, Pauli::X)?;
    let y = chain.with(p, Pauli::Y)?;
    PauliSum::from_terms(n_qubits, [(x, HALF), (y, y_coeff)])
}

/// `n_p = a†_p a_p = ½(I − Z_p)`.
pub fn number_op(p: usize, n_qubits: usize) -> Result<PauliSum> {
    PauliSum::from_terms(
        n_qubits,
        [(PauliString::identity(n_qubits), HALF), (PauliString::single(n_qubits, p, Pauli::Z)?, -HALF)],
    )
}

/// Precomputed JW ladder operators for every spin-orbital of a register.
struct Ladders {
    create: Vec<PauliSum>,
    annihilate: Vec<PauliSum>,
}

impl Ladders {
    fn new(n_qubits: usize) -> Result<Self> {
        Ok(Self {
            create: (0..n_qubits).map(|p| jw_creation(p, n_qubits)).collect::<Result<_>>()?,
            annihilate: (0..n_qubits).map(|p| jw_annihilation(p, n_qubits)).collect::<Result<_>>()?,
        })
    }

    /// `a†_i a_j`
    fn hop(&self, i: usize, j: usize) -> PauliSum {
        &self.create[i] * &self.annihilate[j]
    }
}

/// Spin-summed one-body operator `Σ_pq m_pq Σ_σ a†_pσ a_qσ`.
fn one_body(n_orb: usize, m: impl Fn(usize, usize) -> f64, ladders: &Ladders) -> PauliSum {
    let n_qubits = 2 * n_orb;
    let mut out = PauliSum::zero(n_qubits);
    for p in 0..n_orb {
        for q in 0..n_orb {
            let c = m(p, q);
            if c == 0.0 {
                continue;
            }
            for beta in [false, true] {
                let hop = ladders.hop(spin_orbital(n_orb, p, beta), spin_orbital(n_orb, q, beta));
                for (s, v) in hop.terms() {
                    out.add_term(*s, v * c);
                }
            }
        }
    }
    out
}

/// Qubit Hamiltonian `Σ c_i P_i` of the active-space Hamiltonian, including
/// `e_core · I`.
pub fn build_qubit_hamiltonian(ints: &ActiveSpaceIntegrals) -> Result<PauliSum> {
    ints.validate()?;
    let n = ints.n_orb;
    let nq = 2 * n;
    let ladders = Ladders::new(nq)?;
    let mut h = one_body(n, |p, q| ints.h1(p, q), &ladders);
    h.add_term(PauliString::identity(nq), Complex64::new(ints.e_core, 0.0));

    // ½ Σ h_pqrs Σ_στ a†_pσ a†_qτ a_rτ a_sσ
    let mut pair_create = vec![None; nq * nq];
    let mut pair_annihilate = vec![None; nq * nq];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let c = 0.5 * ints.h2(p, q, r, s);
                    if c == 0.0 {
                        continue;
                    }
                    for sigma in [false, true] {
                        for tau in [false, true] {
                            let i = spin_orbital(n, p, sigma);
                            let j = spin_orbital(n, q, tau);
                            let k = spin_orbital(n, r, tau);
                            let l = spin_orbital(n, s, sigma);
                            if i == j || k == l {
                                continue;
                            }
                            let cc = pair_create[i * nq + j]
                                .get_or_insert_with(|| &ladders.create[i] * &ladders.create[j])
                                .clone();
                            let aa = pair_annihilate[k * nq + l]
                                .get_or_insert_with(|| &ladders.annihilate[k] * &ladders.annihilate[l]);
                            for (s1, v1) in cc.terms() {
                                for (s2, v2) in aa.terms() {
                                    let (ph, prod) = s1.multiply(s2)?;
                                    h.add_term(prod, v1 * v2 * ph * c);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h.simplify().into_hermitian(HERMITIAN_TOLERANCE)
}

/// Cartesian components of the dipole operator: electronic one-body part
/// over both spins plus `nuclear_dipole · I`.
pub fn build_dipole_operator(ints: &ActiveSpaceIntegrals) -> Result<[PauliSum; 3]> {
    ints.validate()?;
    let n = ints.n_orb;
    let ladders = Ladders::new(2 * n)?;
    let build = |c: usize| -> Result<PauliSum> {
        let mut d = one_body(n, |p, q| ints.dipole(c, p, q), &ladders);
        d.add_term(PauliString::identity(2 * n), Complex64::new(ints.nuclear_dipole[c], 0.0));
        d.simplify().into_hermitian(HERMITIAN_TOLERANCE)
    };
    Ok([build(0)?, build(1)?, build(2)?])
}

/// Total electron number `N̂ = Σ_q ½(I − Z_q)`.
pub fn build_number_operator(n_orb: usize) -> Result<PauliSum> {
    let nq = 2 * n_orb;
    let mut out = PauliSum::zero(nq);
    for q in 0..nq {
        out = out + number_op(q, nq)?;
    }
    Ok(out.simplify())
}

/// `S_z = ½ Σ_p (n_pα − n_pβ)`.
pub fn build_sz_operator(n_orb: usize) -> Result<PauliSum> {
    let nq = 2 * n_orb;
    let mut out = PauliSum::zero(nq);
    for p in 0..n_orb {
        out = out + number_op(p, nq)?.scale(HALF) - number_op(p + n_orb, nq)?.scale(HALF);
    }
    Ok(out.simplify())
}

/// `S² = S_z² + ½(S₊S₋ + S₋S₊)` with `S₊ = Σ_p a†_pα a_pβ`.
pub fn build_s2_operator(n_orb: usize) -> Result<PauliSum> {
    let nq = 2 * n_orb;
    let ladders = Ladders::new(nq)?;
    let mut s_plus = PauliSum::zero(nq);
    for p in 0..n_orb {
        s_plus = s_plus + ladders.hop(p, p + n_orb);
    }
    let s_minus = s_plus.adjoint();
    let sz = build_sz_operator(n_orb)?;
    let flip = (&s_plus * &s_minus + &s_minus * &s_plus).scale(HALF);
    (&sz * &sz + flip).simplify().into_hermitian(HERMITIAN_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn creation_single_qubit() {
        let a = jw_creation(0, 1).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.coeff(&ps("X")), Complex64::new(0.5, 0.0));
        assert_eq!(a.coeff(&ps("Y")), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn creation_carries_z_chain() {
        let a = jw_creation(1, 2).unwrap();
        assert_eq!(a.coeff(&ps("ZX")), Complex64::new(0.5, 0.0));
        assert_eq!(a.coeff(&ps("ZY")), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn creation_then_annihilation_is_number_operator() {
        for n in 1..4 {
            for p in 0..n {
                let prod = (&jw_creation(p, n).unwrap() * &jw_annihilation(p, n).unwrap()).simplify();
                assert_eq!(prod, number_op(p, n).unwrap(), "p={p} n={n}");
            }
        }
    }

    #[test]
    fn canonical_anticommutation() {
        let n = 4;
        for p in 0..n {
            for q in 0..n {
                let cp = jw_creation(p, n).unwrap();
                let cq = jw_creation(q, n).unwrap();
                let aq = jw_annihilation(q, n).unwrap();
                assert!(cp.anticommutator(&cq).unwrap().is_empty());
                let ac = aq.anticommutator(&cp).unwrap();
                if p == q {
                    assert_eq!(ac, PauliSum::identity(n));
                } else {
                    assert!(ac.is_empty(), "p={p} q={q}: {ac:?}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(jw_creation(3, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn one_orbital_hamiltonian() {
        let eps = -0.7;
        let ints = ActiveSpaceIntegrals::one_body(1, 1, 0.0, vec![eps]);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let expected = PauliSum::from_labels(&[(eps, "II"), (-eps / 2.0, "ZI"), (-eps / 2.0, "IZ")]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn asymmetric_h1_rejected() {
        let ints = ActiveSpaceIntegrals::one_body(2, 2, 0.0, vec![1.0, 0.2, 0.3, 1.0]);
        assert!(matches!(build_qubit_hamiltonian(&ints), Err(Error::InvalidIntegrals(_))));
    }

    #[test]
    fn dipole_with_only_nuclear_part() {
        let mut ints = ActiveSpaceIntegrals::one_body(2, 2, 0.0, vec![0.0; 4]);
        ints.nuclear_dipole = [0.0, 0.0, 1.25];
        let [dx, dy, dz] = build_dipole_operator(&ints).unwrap();
        assert!(dx.is_empty() && dy.is_empty());
        assert_eq!(dz, PauliSum::identity(4).scale(Complex64::new(1.25, 0.0)));
    }
}

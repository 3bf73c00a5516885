//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;
use siqnn::operators::{ActiveSpaceIntegrals, IntegralBundle};
use siqnn::simulator::StateVector;

pub fn fixture(name: &str) -> IntegralBundle {
    IntegralBundle::load(format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn single(p: char) -> [[C; 2]; 2] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        _ => panic!("bad label"),
    }
}

/// Dense matrix of a Pauli label (character q acts on bit q of the index).
pub fn pauli_matrix(label: &str) -> DMatrix<C> {
    let ops: Vec<[[C; 2]; 2]> = label.chars().map(single).collect();
    let dim = 1 << ops.len();
    DMatrix::from_fn(dim, dim, |i, j| {
        ops.iter().enumerate().fold(c(1.0, 0.0), |acc, (q, m)| acc * m[i >> q & 1][j >> q & 1])
    })
}

/// Two-by-two gate `u` on qubit `q` of an `n`-qubit register, optionally
/// conditioned on `control` being 1.
pub fn one_qubit_gate(n: usize, q: usize, control: Option<usize>, u: [[C; 2]; 2]) -> DMatrix<C> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |i, j| {
        let active = control.is_none_or(|cq| j >> cq & 1 == 1);
        if !active {
            return if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
        }
        if (i ^ j) & !(1 << q) != 0 {
            return c(0.0, 0.0);
        }
        u[i >> q & 1][j >> q & 1]
    })
}

/// `exp(iG)` for Hermitian `G` by eigendecomposition.
pub fn expi(g: &DMatrix<C>) -> DMatrix<C> {
    let eig = g.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(0.0, l).exp()));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Label with `a` on qubit `qa`, `b` on qubit `qb`, identity elsewhere.
pub fn label2(n: usize, qa: usize, a: char, qb: usize, b: char) -> String {
    (0..n)
        .map(|q| {
            if q == qa {
                a
            } else if q == qb {
                b
            } else {
                'I'
            }
        })
        .collect()
}

pub fn n_gate_dense(n: usize, q1: usize, q2: usize, t: [f64; 3]) -> DMatrix<C> {
    let g = pauli_matrix(&label2(n, q1, 'X', q2, 'X')) * c(t[0], 0.0)
        + pauli_matrix(&label2(n, q1, 'Y', q2, 'Y')) * c(t[1], 0.0)
        + pauli_matrix(&label2(n, q1, 'Z', q2, 'Z')) * c(t[2], 0.0);
    expi(&g)
}

/// Controlled RZ then controlled RX, control `src`, target `sink`,
/// `R_P(θ) = exp(−iθP/2)`.
pub fn p_gate_dense(n: usize, src: usize, sink: usize, t: [f64; 2]) -> DMatrix<C> {
    let rz = [[c(0.0, -t[0] / 2.0).exp(), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, t[0] / 2.0).exp()]];
    let (co, si) = ((t[1] / 2.0).cos(), (t[1] / 2.0).sin());
    let rx = [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]];
    one_qubit_gate(n, sink, Some(src), rx) * one_qubit_gate(n, sink, Some(src), rz)
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1 << n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    StateVector::normalized(amps).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Apply `a_mode` to a basis state; `None` if the mode is empty. Modes are
/// ordered by index and the sign counts occupied modes below `mode`.
fn annihilate(state: usize, mode: usize) -> Option<(f64, usize)> {
    if state >> mode & 1 == 0 {
        return None;
    }
    let below = (state & ((1 << mode) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1.0 } else { -1.0 }, state ^ (1 << mode)))
}

fn create(state: usize, mode: usize) -> Option<(f64, usize)> {
    if state >> mode & 1 == 1 {
        return None;
    }
    let below = (state & ((1 << mode) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1.0 } else { -1.0 }, state | (1 << mode)))
}

/// Apply a product of ladder operators, rightmost first. `true` = creation.
fn apply_string(state: usize, ops: &[(bool, usize)]) -> Option<(f64, usize)> {
    let mut sign = 1.0;
    let mut s = state;
    for &(dag, mode) in ops.iter().rev() {
        let (f, t) = if dag { create(s, mode)? } else { annihilate(s, mode)? };
        sign *= f;
        s = t;
    }
    Some((sign, s))
}

/// Second-quantized Hamiltonian in the occupation-number basis:
/// `e_core + Σ h_pq a†_pσ a_qσ + ½ Σ h_pqrs a†_pσ a†_qτ a_rτ a_sσ`,
/// mode `p` for α and `n + p` for β.
pub fn fermionic_hamiltonian(ints: &ActiveSpaceIntegrals) -> DMatrix<f64> {
    let n = ints.n_orb;
    let dim = 1 << (2 * n);
    let mode = |p: usize, beta: bool| if beta { n + p } else { p };
    let mut h = DMatrix::<f64>::identity(dim, dim) * ints.e_core;
    for col in 0..dim {
        for p in 0..n {
            for q in 0..n {
                for s in [false, true] {
                    if let Some((f, row)) = apply_string(col, &[(true, mode(p, s)), (false, mode(q, s))]) {
                        h[(row, col)] += f * ints.h1(p, q);
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = ints.h2(p, q, r, s);
                        for sig in [false, true] {
                            for tau in [false, true] {
                                let ops = [
                                    (true, mode(p, sig)),
                                    (true, mode(q, tau)),
                                    (false, mode(r, tau)),
                                    (false, mode(s, sig)),
                                ];
                                if let Some((f, row)) = apply_string(col, &ops) {
                                    h[(row, col)] += 0.5 * f * v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

/// Random integrals with the real eightfold symmetry, `h_pqrs = (ps|qr)`.
pub fn random_integrals(n: usize, n_elec: usize, rng: &mut impl Rng) -> ActiveSpaceIntegrals {
    let mut h1 = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..=p {
            let v = rng.random_range(-1.0..1.0);
            h1[p * n + q] = v;
            h1[q * n + p] = v;
        }
    }
    let mut chem = vec![0.0; n.pow(4)];
    let ix = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let canon = [
                        ix(a, b, cc, d),
                        ix(b, a, cc, d),
                        ix(a, b, d, cc),
                        ix(b, a, d, cc),
                        ix(cc, d, a, b),
                        ix(d, cc, a, b),
                        ix(cc, d, b, a),
                        ix(d, cc, b, a),
                    ];
                    let k = *canon.iter().min().unwrap();
                    if k == ix(a, b, cc, d) {
                        let v = rng.random_range(-0.5..0.5);
                        for &t in &canon {
                            chem[t] = v;
                        }
                    }
                }
            }
        }
    }
    let mut h2 = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    h2[ix(p, q, r, s)] = chem[ix(p, s, q, r)];
                }
            }
        }
    }
    let mut ints = ActiveSpaceIntegrals::one_body(n, n_elec, rng.random_range(-1.0..1.0), h1);
    ints.h2 = h2;
    ints
}

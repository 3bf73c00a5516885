//! Qubit-wise commuting partitions of a Pauli sum.

use num_complex::Complex64;

use super::pauli::{Pauli, PauliString};
use super::sum::PauliSum;

/// A set of mutually qubit-wise commuting terms, measurable in one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct QwcGroup {
    pub terms: Vec<(PauliString, Complex64)>,
}

impl QwcGroup {
    /// Per-qubit measurement basis: the non-identity operator any member uses there.
    pub fn basis(&self) -> PauliString {
        let n = self.terms.first().map(|(p, _)| p.n_qubits()).unwrap_or(0);
        let mut out = PauliString::identity(n);
        for (p, _) in &self.terms {
            for q in 0..n {
                let op = p.get(q);
                if op != Pauli::I {
                    out = out.with(q, op).expect("qubit in range");
                }
            }
        }
        out
    }

    pub fn is_pairwise_qwc(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, (a, _))| self.terms[i + 1..].iter().all(|(b, _)| a.qubit_wise_commutes(b)))
    }

    pub fn to_sum(&self) -> PauliSum {
        let n = self.terms.first().map(|(p, _)| p.n_qubits()).unwrap_or(0);
        PauliSum::from_terms(n, self.terms.iter().copied()).expect("uniform register")
    }
}

/// Greedy first-fit over terms sorted by descending |coefficient|
/// (ties broken by string order). The identity term, if present, is placed
/// like any other string and joins the first group.
pub fn qwc_group(sum: &PauliSum) -> Vec<QwcGroup> {
    let mut terms: Vec<(PauliString, Complex64)> = sum.terms().map(|(p, c)| (*p, *c)).collect();
    terms.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then(a.0.cmp(&b.0)));

    let mut groups: Vec<(QwcGroup, PauliString)> = Vec::new();
    for (p, c) in terms {
        let slot = groups.iter_mut().find(|(_, basis)| basis.qubit_wise_commutes(&p));
        match slot {
            Some((g, basis)) => {
                g.terms.push((p, c));
                for q in 0..p.n_qubits() {
                    let op = p.get(q);
                    if op != Pauli::I {
                        *basis = basis.with(q, op).expect("qubit in range");
                    }
                }
            }
            None => groups.push((QwcGroup { terms: vec![(p, c)] }, p)),
        }
    }
    groups.into_iter().map(|(g, _)| g).collect()
}

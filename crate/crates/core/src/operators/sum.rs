//! Weighted sums of Pauli strings.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::pauli::{i_pow, PauliString};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are removed by [`PauliSum::simplify`].
pub const DROP_TOLERANCE: f64 = 1e-12;

/// `Σ_i c_i P_i` with unique strings. Iteration order is the string order,
/// which keeps every derived quantity deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_string(PauliString::identity(n_qubits), Complex64::new(1.0, 0.0))
    }

    pub fn from_string(p: PauliString, coeff: Complex64) -> Self {
        let mut s = Self::zero(p.n_qubits());
        s.add_term(p, coeff);
        s
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::LengthMismatch { expected: n_qubits, got: p.n_qubits() });
            }
            s.add_term(p, c);
        }
        Ok(s)
    }

    /// Parse `[(coeff, "XIZ"), ...]` with real coefficients. Mostly for tests.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let n = terms.first().map(|(_, s)| s.len()).unwrap_or(0);
        let parsed = terms
            .iter()
            .map(|(c, s)| Ok((s.parse::<PauliString>()?, Complex64::new(*c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, p: PauliString, coeff: Complex64) {
        debug_assert_eq!(p.n_qubits(), self.n_qubits);
        *self.terms.entry(p).or_default() += coeff;
    }

    /// Drop coefficients with magnitude below `tol`.
    pub fn simplify_with(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() >= tol);
        self
    }

    pub fn simplify(self) -> Self {
        self.simplify_with(DROP_TOLERANCE)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self
    }

    pub fn adjoint(&self) -> Self {
        Self { n_qubits: self.n_qubits, terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect() }
    }

    /// Largest imaginary part of any coefficient. Zero iff the sum is Hermitian,
    /// since every string is itself Hermitian.
    pub fn hermiticity_error(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Zero the imaginary parts after checking they are below `tol`.
    pub fn into_hermitian(mut self, tol: f64) -> Result<Self> {
        let dev = self.hermiticity_error();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        for c in self.terms.values_mut() {
            c.im = 0.0;
        }
        Ok(self)
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(PauliString::is_diagonal)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        let mut out = Self::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (k, p) = a.mul_raw(b);
                out.add_term(p, ca * cb * i_pow(k));
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out)
    }

    /// `[self, other] = self·other − other·self`, simplified.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        Ok((ab - ba).simplify())
    }

    /// `{self, other} = self·other + other·self`, simplified.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        Ok((ab + ba).simplify())
    }

    /// Largest coefficient magnitude; 0 for the empty sum.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `out += self · amps` for a dense amplitude vector of length `2^n`.
    pub fn apply_into(&self, amps: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(amps.len(), 1 << self.n_qubits);
        for (p, c) in &self.terms {
            if p.is_diagonal() {
                for (i, a) in amps.iter().enumerate() {
                    out[i] += c * p.z_sign(i) * a;
                }
            } else {
                for (i, a) in amps.iter().enumerate() {
                    let (ph, j) = p.apply_to_basis(i);
                    out[j] += c * ph * a;
                }
            }
        }
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); amps.len()];
        self.apply_into(amps, &mut out);
        out
    }

    /// Relabel qubits (see [`PauliString::permuted`]).
    pub fn permuted(&self, map: impl Fn(usize) -> usize + Copy) -> Result<Self> {
        let mut out = Self::zero(self.n_qubits);
        for (p, c) in &self.terms {
            out.add_term(p.permuted(map)?, *c);
        }
        Ok(out)
    }
}

impl Add for PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: PauliSum) -> PauliSum {
        self.try_add(&rhs).expect("register sizes differ")
    }
}

impl Sub for PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: PauliSum) -> PauliSum {
        self + (-rhs)
    }
}

impl Neg for PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("register sizes differ")
    }
}

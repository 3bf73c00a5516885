//! Pauli strings in symplectic (x, z) bit representation.
//!
//! Qubit `q` corresponds to bit `q` of both masks and of computational
//! basis indices. A string with bits `(x, z)` denotes the operator
//! `i^{popcount(x & z)} X^x Z^z`, so that every qubit carries one of the
//! Hermitian operators I, X, Y, Z and no phase is attached to the string.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum register size representable by the bit masks.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Fourth root of unity `i^k`.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A phase-free tensor product of single-qubit Paulis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        Self { n_qubits, x: 0, z: 0 }
    }

    /// Build from raw masks. Bits above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge { n_qubits, limit: MAX_QUBITS });
        }
        let valid = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if (x | z) & !valid != 0 {
            return Err(Error::IndexOutOfRange { index: (63 - ((x | z) & !valid).leading_zeros()) as usize, n_qubits });
        }
        Ok(Self { n_qubits, x, z })
    }

    /// Build from a sparse list of `(qubit, op)` pairs; later entries overwrite earlier ones.
    pub fn from_ops(n_qubits: usize, ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge { n_qubits, limit: MAX_QUBITS });
        }
        let mut s = Self::identity(n_qubits);
        for (q, p) in ops {
            s = s.with(q, p)?;
        }
        Ok(s)
    }

    /// Single-qubit operator `p` on qubit `q`.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Result<Self> {
        Self::from_ops(n_qubits, [(q, p)])
    }

    /// Z on every qubit in `qubits`.
    pub fn z_on(n_qubits: usize, qubits: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::from_ops(n_qubits, qubits.into_iter().map(|q| (q, Pauli::Z)))
    }

    pub fn with(mut self, q: usize, p: Pauli) -> Result<Self> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange { index: q, n_qubits: self.n_qubits });
        }
        let (xb, zb) = p.bits();
        let m = 1u64 << q;
        self.x = if xb { self.x | m } else { self.x & !m };
        self.z = if zb { self.z | m } else { self.z & !m };
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// True if only I and Z appear.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Product `self · other = phase · product`, with `phase ∈ {±1, ±i}`.
    pub fn multiply(&self, other: &Self) -> Result<(Complex64, Self)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        let (k, product) = self.mul_raw(other);
        Ok((i_pow(k), product))
    }

    /// Product with the phase returned as a power of `i`. Lengths must match.
    pub(crate) fn mul_raw(&self, other: &Self) -> (u32, Self) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^{x1 z1} X^x1 Z^z1 · i^{x2 z2} X^x2 Z^z2 = i^{x1z1 + x2z2 + 2 z1x2} X^x Z^z
        let k = (self.x & self.z).count_ones() + (other.x & other.z).count_ones() + 2 * (self.z & other.x).count_ones();
        let k = (k + 4 * 64 - (x & z).count_ones()) % 4;
        (k, Self { n_qubits: self.n_qubits, x, z })
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Qubit-wise commutation: on every qubit the operators agree or one is I.
    pub fn qubit_wise_commutes(&self, other: &Self) -> bool {
        let overlap = self.support() & other.support();
        ((self.x ^ other.x) | (self.z ^ other.z)) & overlap == 0
    }

    /// Action on a computational basis state: `P|i⟩ = phase · |i ⊕ x⟩`.
    #[inline]
    pub fn apply_to_basis(&self, index: usize) -> (Complex64, usize) {
        let k = (self.x & self.z).count_ones() + 2 * (index as u64 & self.z).count_ones();
        (i_pow(k), index ^ self.x as usize)
    }

    /// ±1 eigenvalue of a diagonal string on basis state `index`.
    #[inline]
    pub fn z_sign(&self, index: usize) -> f64 {
        if (index as u64 & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Permute qubits: qubit `q` of `self` moves to `map(q)`.
    pub fn permuted(&self, map: impl Fn(usize) -> usize) -> Result<Self> {
        let mut out = Self::identity(self.n_qubits);
        for q in 0..self.n_qubits {
            let p = self.get(q);
            if p != Pauli::I {
                out = out.with(map(q), p)?;
            }
        }
        Ok(out)
    }

    /// Label in qubit order `q0 q1 …`, e.g. `"ZXI"`.
    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).as_char()).collect()
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self.label())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    /// Parse a label such as `"XIZY"`; character `k` is qubit `k`.
    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .enumerate()
            .map(|(q, c)| match c {
                'I' => Ok((q, Pauli::I)),
                'X' => Ok((q, Pauli::X)),
                'Y' => Ok((q, Pauli::Y)),
                'Z' => Ok((q, Pauli::Z)),
                other => Err(Error::InvalidArgument(format!("bad Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_ops(s.chars().count(), ops)
    }
}

//! Dense matrix images of Pauli sums, for small registers and test oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sum::PauliSum;
use crate::error::{Error, Result};

/// Largest register [`to_dense`] will materialize (2^14 × 2^14 complex ≈ 4 GiB).
pub const DENSE_QUBIT_LIMIT: usize = 14;

/// `Σ c_i P_i` as a `2^n × 2^n` matrix, with row/column index bit `q` = qubit `q`.
pub fn to_dense(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = sum.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::RegisterTooLarge { n_qubits: n, limit: DENSE_QUBIT_LIMIT });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (p, c) in sum.terms() {
        for col in 0..dim {
            let (ph, row) = p.apply_to_basis(col);
            m[(row, col)] += c * ph;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_and_x_matrices() {
        let z = to_dense(&PauliSum::from_labels(&[(1.0, "Z")]).unwrap()).unwrap();
        assert_eq!(z[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(z[(0, 1)], Complex64::default());
        let x = to_dense(&PauliSum::from_labels(&[(1.0, "X")]).unwrap()).unwrap();
        assert_eq!(x[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(x[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(x[(0, 0)], Complex64::default());
    }

    #[test]
    fn y_matrix() {
        let y = to_dense(&PauliSum::from_labels(&[(1.0, "Y")]).unwrap()).unwrap();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn qubit_zero_is_least_significant_bit() {
        // X on qubit 0 of two qubits maps |00⟩ (0) to |01⟩ (index 1)
        let x0 = to_dense(&PauliSum::from_labels(&[(1.0, "XI")]).unwrap()).unwrap();
        assert_eq!(x0[(1, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn register_guard() {
        let s = PauliSum::identity(15);
        assert!(matches!(to_dense(&s), Err(Error::RegisterTooLarge { .. })));
    }
}

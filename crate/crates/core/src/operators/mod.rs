//! Pauli algebra, Jordan-Wigner mapping and the qubit operators built from
//! integral bundles.

mod dense;
mod integrals;
mod jw;
mod pauli;
mod qwc;
mod sum;

pub use dense::{to_dense, DENSE_QUBIT_LIMIT};
pub use integrals::{ActiveSpaceIntegrals, GeometryRecord, IntegralBundle, SYMMETRY_TOLERANCE};
pub use jw::{
    build_dipole_operator, build_number_operator, build_qubit_hamiltonian, build_s2_operator, build_sz_operator,
    jw_annihilation, jw_creation, number_op, spin_orbital,
};
pub use pauli::{i_pow, Pauli, PauliString, MAX_QUBITS};
pub use qwc::{qwc_group, QwcGroup};
pub use sum::{PauliSum, DROP_TOLERANCE};

//! Statevector simulation: gate application, expectation values, sampling
//! and gradients.

mod gates;
mod gradient;
mod sampling;
mod state;

pub use gates::{apply_gate, apply_n_gate, apply_p_gate, CompiledCircuit, GateInstruction, GateKind, Rotation};
pub use gradient::{adjoint_gradient, gradient, gradient_diagonal, parameter_shift_gradient, ValueAndGradient};
pub use sampling::{estimate_z_observable, sample_probabilities, sample_z_basis, z_term_means, Counts};
pub use state::{expectation, StateVector, MAX_SIM_QUBITS, NORM_TOLERANCE, OBSERVABLE_TOLERANCE};

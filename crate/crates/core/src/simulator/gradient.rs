//! Derivatives of circuit expectation values.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use super::gates::{rotate, CompiledCircuit};
use super::state::{StateVector, OBSERVABLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::operators::{PauliString, PauliSum};

/// Expectation value and its gradient with respect to the parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueAndGradient {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// `⟨bra|P|ket⟩`
fn pauli_element(p: &PauliString, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::default();
    for (i, k) in ket.iter().enumerate() {
        let (ph, j) = p.apply_to_basis(i);
        acc += bra[j].conj() * ph * k;
    }
    acc
}

/// Reverse sweep given the output state `ψ = U|ψ_in⟩` and `λ = Oψ` for a
/// Hermitian `O`; returns `∂⟨ψ|O|ψ⟩/∂θ`. Consumes both buffers.
pub fn adjoint_gradient(
    circuit: &CompiledCircuit,
    angles: &[f64],
    psi: Vec<Complex64>,
    lambda: Vec<Complex64>,
) -> Result<Vec<f64>> {
    let dim = 1usize << circuit.n_qubits();
    for len in [psi.len(), lambda.len()] {
        if len != dim {
            return Err(Error::LengthMismatch { expected: dim, got: len });
        }
    }
    if angles.len() != circuit.rotations().len() {
        return Err(Error::LengthMismatch { expected: circuit.rotations().len(), got: angles.len() });
    }
    Ok(adjoint_sweep(circuit, angles, psi, lambda))
}

fn adjoint_sweep(
    circuit: &CompiledCircuit,
    angles: &[f64],
    mut psi: Vec<Complex64>,
    mut lambda: Vec<Complex64>,
) -> Vec<f64> {
    let mut grad = vec![0.0; circuit.n_params()];
    for (r, &phi) in circuit.rotations().iter().zip(angles).rev() {
        // d/dφ ⟨ψ|O|ψ⟩ = 2 Re ⟨λ|iP|ψ⟩
        let d = -2.0 * pauli_element(&r.pauli, &lambda, &psi).im;
        grad[r.slot] += r.factor * d;
        rotate(&mut psi, &r.pauli, -phi);
        rotate(&mut lambda, &r.pauli, -phi);
    }
    grad
}

fn run(circuit: &CompiledCircuit, params: &[f64], state_in: &StateVector) -> Result<(Vec<f64>, StateVector)> {
    let angles = circuit.angles(params)?;
    let mut psi = state_in.clone();
    circuit.apply_angles(&mut psi, &angles)?;
    Ok((angles, psi))
}

/// Exact reverse-mode gradient of `⟨ψ_in|U(θ)† O U(θ)|ψ_in⟩`; tied slots
/// accumulate the contributions of every rotation that uses them.
pub fn gradient(
    circuit: &CompiledCircuit,
    params: &[f64],
    state_in: &StateVector,
    obs: &PauliSum,
) -> Result<ValueAndGradient> {
    if obs.n_qubits() != circuit.n_qubits() {
        return Err(Error::LengthMismatch { expected: circuit.n_qubits(), got: obs.n_qubits() });
    }
    let dev = obs.hermiticity_error();
    if dev > OBSERVABLE_TOLERANCE {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (angles, psi) = run(circuit, params, state_in)?;
    let psi = psi.into_amplitudes();
    let lambda = obs.apply(&psi);
    let value: f64 = psi.iter().zip(&lambda).map(|(a, b)| (a.conj() * b).re).sum();
    Ok(ValueAndGradient { value, gradient: adjoint_sweep(circuit, &angles, psi, lambda) })
}

/// [`gradient`] for a diagonal observable given by its values on the basis.
pub fn gradient_diagonal(
    circuit: &CompiledCircuit,
    params: &[f64],
    state_in: &StateVector,
    diag: &[f64],
) -> Result<ValueAndGradient> {
    if diag.len() != state_in.dim() {
        return Err(Error::LengthMismatch { expected: state_in.dim(), got: diag.len() });
    }
    let (angles, psi) = run(circuit, params, state_in)?;
    let psi = psi.into_amplitudes();
    let lambda: Vec<Complex64> = psi.iter().zip(diag).map(|(a, d)| a * d).collect();
    let value: f64 = psi.iter().zip(diag).map(|(a, d)| a.norm_sqr() * d).sum();
    Ok(ValueAndGradient { value, gradient: adjoint_sweep(circuit, &angles, psi, lambda) })
}

/// Two-term shift rule applied rotation by rotation.
///
/// `f` evaluates the (possibly noisy) expectation for a vector of per-rotation
/// angles. For `exp(iφP)` the rule is `f'(φ) = f(φ + π/4) − f(φ − π/4)`.
pub fn parameter_shift_gradient(
    circuit: &CompiledCircuit,
    params: &[f64],
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut angles = circuit.angles(params)?;
    let mut grad = vec![0.0; circuit.n_params()];
    for (k, r) in circuit.rotations().iter().enumerate() {
        let phi = angles[k];
        angles[k] = phi + FRAC_PI_4;
        let plus = f(&angles)?;
        angles[k] = phi - FRAC_PI_4;
        let minus = f(&angles)?;
        angles[k] = phi;
        grad[r.slot] += r.factor * (plus - minus);
    }
    Ok(grad)
}

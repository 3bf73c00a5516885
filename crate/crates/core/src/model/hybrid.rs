//! `y(ψ₀, R) = Σ_i w_i(R) ⟨ψ₀|U(θ)† O_i U(θ)|ψ₀⟩`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Trace};
use crate::ansatz::{build_observable_basis, CircuitTemplate, ObservableBasis};
use crate::error::{Error, Result};
use crate::simulator::{adjoint_gradient, sample_z_basis, CompiledCircuit, StateVector};
use crate::spectra::Scaling;

/// Source of the observable weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    /// Fixed weights, independent of `R`.
    Direct { w: Vec<f64> },
    /// Weights produced by an `R → w` network.
    Mlp { mlp: Mlp },
}

impl Head {
    pub fn param_count(&self) -> usize {
        match self {
            Head::Direct { w } => w.len(),
            Head::Mlp { mlp } => mlp.param_count(),
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Head::Direct { w } => w,
            Head::Mlp { mlp } => mlp.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Head::Direct { w } => w,
            Head::Mlp { mlp } => mlp.params_mut(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            Head::Direct { w } => w.len(),
            Head::Mlp { mlp } => mlp.output_dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridModel {
    template: CircuitTemplate,
    basis: ObservableBasis,
    circuit: CompiledCircuit,
    theta: Vec<f64>,
    head: Head,
}

/// Gradients with respect to circuit angles and head parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradient {
    pub theta: Vec<f64>,
    pub head: Vec<f64>,
}

impl ModelGradient {
    pub fn zeros(model: &HybridModel) -> Self {
        Self { theta: vec![0.0; model.theta.len()], head: vec![0.0; model.head.param_count()] }
    }

    /// Concatenation `[θ, head]`.
    pub fn flat(&self) -> Vec<f64> {
        self.theta.iter().chain(&self.head).copied().collect()
    }
}

/// Everything a forward pass produces that the backward pass reuses.
pub struct Pass {
    psi: Vec<Complex64>,
    expectations: Vec<f64>,
    weights: Vec<f64>,
    trace: Option<Trace>,
    pub y: f64,
}

impl Pass {
    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl HybridModel {
    pub fn new(template: CircuitTemplate, theta: Vec<f64>, head: Head) -> Result<Self> {
        let basis = build_observable_basis(&template)?;
        let circuit = template.compile()?;
        if theta.len() != template.param_count {
            return Err(Error::LengthMismatch { expected: template.param_count, got: theta.len() });
        }
        if head.output_dim() != basis.len() {
            return Err(Error::LengthMismatch { expected: basis.len(), got: head.output_dim() });
        }
        if let Head::Mlp { mlp } = &head {
            if mlp.input_dim() != 1 {
                return Err(Error::InvalidArgument("weight network must take R only".into()));
            }
        }
        Ok(Self { template, basis, circuit, theta, head })
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn basis(&self) -> &ObservableBasis {
        &self.basis
    }

    pub fn circuit(&self) -> &CompiledCircuit {
        &self.circuit
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut Head {
        &mut self.head
    }

    pub fn with_head(&self, head: Head) -> Result<Self> {
        Self::new(self.template.clone(), self.theta.clone(), head)
    }

    pub fn param_count(&self) -> usize {
        self.theta.len() + self.head.param_count()
    }

    /// `[θ, head]`
    pub fn flat_params(&self) -> Vec<f64> {
        self.theta.iter().chain(self.head.params()).copied().collect()
    }

    pub fn set_flat_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::LengthMismatch { expected: self.param_count(), got: p.len() });
        }
        let n = self.theta.len();
        self.theta.copy_from_slice(&p[..n]);
        self.head.params_mut().copy_from_slice(&p[n..]);
        Ok(())
    }

    pub fn weights(&self, r: f64) -> Vec<f64> {
        match &self.head {
            Head::Direct { w } => w.clone(),
            Head::Mlp { mlp } => mlp.forward(&[r]),
        }
    }

    fn check_state(&self, psi0: &StateVector) -> Result<()> {
        if psi0.n_qubits() != self.template.n_qubits() {
            return Err(Error::LengthMismatch { expected: self.template.n_qubits(), got: psi0.n_qubits() });
        }
        Ok(())
    }

    /// `U(θ)|ψ₀⟩`
    pub fn evolve(&self, psi0: &StateVector) -> Result<StateVector> {
        self.check_state(psi0)?;
        let mut psi = psi0.clone();
        self.circuit.apply(&mut psi, &self.theta)?;
        Ok(psi)
    }

    /// Exact expectation of every observable term after the circuit.
    pub fn expectations(&self, psi0: &StateVector) -> Result<Vec<f64>> {
        self.basis.expectations(&self.evolve(psi0)?)
    }

    pub fn forward(&self, psi0: &StateVector, r: f64) -> Result<f64> {
        Ok(self.pass(psi0, r)?.y)
    }

    /// Single Z-basis measurement of `n_shots`; every term is estimated from
    /// the same counts.
    pub fn forward_shots(&self, psi0: &StateVector, r: f64, n_shots: u64, seed: u64) -> Result<f64> {
        let counts = sample_z_basis(&self.evolve(psi0)?, n_shots, seed)?;
        let e = self.basis.estimate(&counts)?;
        Ok(dot(&self.weights(r), &e))
    }

    pub fn pass(&self, psi0: &StateVector, r: f64) -> Result<Pass> {
        let psi = self.evolve(psi0)?;
        let expectations = self.basis.expectations(&psi)?;
        let (weights, trace) = match &self.head {
            Head::Direct { w } => (w.clone(), None),
            Head::Mlp { mlp } => {
                let t = mlp.forward_trace(&[r]);
                (t.output().to_vec(), Some(t))
            }
        };
        let y = dot(&weights, &expectations);
        Ok(Pass { psi: psi.into_amplitudes(), expectations, weights, trace, y })
    }

    /// Accumulate the gradient of `dl_dy · y` into `grad`.
    pub fn backward_pass(&self, pass: Pass, dl_dy: f64, grad: &mut ModelGradient) -> Result<()> {
        if dl_dy == 0.0 {
            return Ok(());
        }
        let dw: Vec<f64> = pass.expectations.iter().map(|e| dl_dy * e).collect();
        match (&self.head, &pass.trace) {
            (Head::Direct { .. }, _) => {
                for (g, d) in grad.head.iter_mut().zip(&dw) {
                    *g += d;
                }
            }
            (Head::Mlp { mlp }, Some(trace)) => {
                mlp.backward(trace, &dw, &mut grad.head);
            }
            (Head::Mlp { .. }, None) => unreachable!("network head always records a trace"),
        }
        let diag = self.basis.weighted_diagonal(&pass.weights);
        let lambda: Vec<Complex64> = pass.psi.iter().zip(&diag).map(|(a, d)| a * (dl_dy * d)).collect();
        let angles = self.circuit.angles(&self.theta)?;
        let g = adjoint_gradient(&self.circuit, &angles, pass.psi, lambda)?;
        for (a, b) in grad.theta.iter_mut().zip(g) {
            *a += b;
        }
        Ok(())
    }

    /// Gradient of `dl_dy · y(ψ₀, R)` with respect to `(θ, head)`.
    pub fn backward(&self, psi0: &StateVector, r: f64, dl_dy: f64) -> Result<ModelGradient> {
        let mut grad = ModelGradient::zeros(self);
        let pass = self.pass(psi0, r)?;
        self.backward_pass(pass, dl_dy, &mut grad)?;
        Ok(grad)
    }

    pub fn checkpoint(&self, scaling: Option<Scaling>) -> Checkpoint {
        Checkpoint {
            template_hash: self.template.hash(),
            template: self.template.clone(),
            theta: self.theta.clone(),
            head: self.head.clone(),
            scaling,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Self> {
        if c.template.hash() != c.template_hash {
            return Err(Error::InvalidArgument("checkpoint template hash mismatch".into()));
        }
        Self::new(c.template.clone(), c.theta.clone(), c.head.clone())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Serialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub template_hash: String,
    pub template: CircuitTemplate,
    pub theta: Vec<f64>,
    pub head: Head,
    #[serde(default)]
    pub scaling: Option<Scaling>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

//! Fully connected tanh network with a linear output layer.
//!
//! Parameters are one flat vector: for each layer the row-major weight
//! matrix `(out × in)` followed by the bias vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    widths: Vec<usize>,
    params: Vec<f64>,
}

/// Layer activations from a forward pass, needed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Trace {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least the input")
    }
}

/// Parameter count of a network with the given layer widths.
pub fn mlp_param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

/// Largest single hidden width `h` with `2h + (h+1)k ≤ budget`; at least 1.
pub fn hidden_width_for_budget(k: usize, budget: usize) -> usize {
    let mut h = 1;
    while mlp_param_count(&[1, h + 1, k]) <= budget {
        h += 1;
    }
    h
}

impl Mlp {
    pub fn new(widths: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid layer widths {widths:?}")));
        }
        let n = mlp_param_count(&widths);
        if params.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: params.len() });
        }
        Ok(Self { widths, params })
    }

    pub fn zeros(widths: Vec<usize>) -> Result<Self> {
        let n = mlp_param_count(&widths);
        Self::new(widths, vec![0.0; n])
    }

    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn init_uniform<R: Rng + ?Sized>(widths: Vec<usize>, rng: &mut R) -> Result<Self> {
        let mut params = Vec::with_capacity(mlp_param_count(&widths));
        for w in widths.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] + 1) * w[1] {
                params.push(rng.random_range(-bound..=bound));
            }
        }
        Self::new(widths, params)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("validated")
    }

    /// Offset of the bias vector of layer `l` and of its weight matrix.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let w = mlp_param_count(&self.widths[..=l]);
        (w, w + self.widths[l] * self.widths[l + 1])
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_trace(x).acts.pop().expect("nonempty")
    }

    pub fn forward_trace(&self, x: &[f64]) -> Trace {
        assert_eq!(x.len(), self.input_dim(), "input width");
        let n_layers = self.widths.len() - 1;
        let mut acts = vec![x.to_vec()];
        for l in 0..n_layers {
            let (wo, bo) = self.offsets(l);
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let input = &acts[l];
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &self.params[wo + o * n_in..wo + (o + 1) * n_in];
                    let z = self.params[bo + o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if l + 1 < n_layers {
                        z.tanh()
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        Trace { acts }
    }

    /// Accumulate `∂(dy·out)/∂params` into `grad`; returns `∂/∂input`.
    pub fn backward(&self, trace: &Trace, dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        assert_eq!(grad.len(), self.params.len(), "gradient buffer");
        let n_layers = self.widths.len() - 1;
        let mut delta = dy.to_vec();
        for l in (0..n_layers).rev() {
            let (wo, bo) = self.offsets(l);
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let input = &trace.acts[l];
            let mut back = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                grad[bo + o] += d;
                for i in 0..n_in {
                    grad[wo + o * n_in + i] += d * input[i];
                    back[i] += d * self.params[wo + o * n_in + i];
                }
            }
            if l > 0 {
                // input of layer l is tanh output of layer l − 1
                for (b, a) in back.iter_mut().zip(input) {
                    *b *= 1.0 - a * a;
                }
            }
            delta = back;
        }
        delta
    }

    /// Network with zero weights everywhere and output bias `b`.
    pub fn constant(widths: Vec<usize>, b: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(widths)?;
        if b.len() != m.output_dim() {
            return Err(Error::LengthMismatch { expected: m.output_dim(), got: b.len() });
        }
        let n = m.params.len();
        m.params[n - b.len()..].copy_from_slice(b);
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn counts_and_budget() {
        assert_eq!(mlp_param_count(&[1, 2, 10]), 34);
        assert_eq!(hidden_width_for_budget(10, 41), 2);
        assert_eq!(hidden_width_for_budget(1, 41), 13);
    }

    #[test]
    fn zero_weights_give_bias() {
        let m = Mlp::constant(vec![1, 3, 2], &[0.5, -1.5]).unwrap();
        assert_eq!(m.forward(&[0.7]), vec![0.5, -1.5]);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = rng_from(5);
        let m = Mlp::init_uniform(vec![1, 4, 3, 2], &mut rng).unwrap();
        let x = [0.3];
        let dy = [0.7, -1.2];
        let f = |m: &Mlp| m.forward(&x).iter().zip(&dy).map(|(a, b)| a * b).sum::<f64>();
        let mut grad = vec![0.0; m.param_count()];
        m.backward(&m.forward_trace(&x), &dy, &mut grad);
        let h = 1e-6;
        for k in 0..m.param_count() {
            let mut p = m.clone();
            p.params[k] += h;
            let up = f(&p);
            p.params[k] -= 2.0 * h;
            let fd = (up - f(&p)) / (2.0 * h);
            assert!((fd - grad[k]).abs() <= 1e-6 * fd.abs().max(1.0), "k={k}: {fd} vs {}", grad[k]);
        }
    }
}

//! Gaussian-process regression with an RBF kernel.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{check_data, Regressor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GprHyper {
    pub length_scale: f64,
    /// Noise variance added to the diagonal.
    pub noise: f64,
    /// Signal variance `s²` of `k = s² exp(−(x−x')²/2ℓ²)`.
    pub signal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GprGrid {
    pub length_scales: Vec<f64>,
    pub noises: Vec<f64>,
    pub signals: Vec<f64>,
}

impl Default for GprGrid {
    fn default() -> Self {
        Self {
            length_scales: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            noises: vec![1e-8, 1e-6, 1e-4],
            signals: vec![0.25, 1.0, 4.0],
        }
    }
}

const JITTERS: [f64; 6] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

#[derive(Debug, Clone)]
pub struct Gpr {
    pub hyper: GprHyper,
    /// Jitter that made the kernel matrix factorizable.
    pub jitter: f64,
    pub log_marginal_likelihood: f64,
    x: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

impl Gpr {
    fn kernel(&self, a: f64, b: f64) -> f64 {
        rbf(&self.hyper, a, b)
    }

    /// Zero-mean GP conditioned on `(x, y)` with fixed hyperparameters.
    pub fn fit(x: &[f64], y: &[f64], hyper: GprHyper) -> Result<Self> {
        check_data(x, y)?;
        let n = x.len();
        let k = DMatrix::from_fn(n, n, |i, j| rbf(&hyper, x[i], x[j]));
        for jitter in JITTERS {
            let m = &k + DMatrix::identity(n, n) * (hyper.noise + jitter);
            let Some(chol) = Cholesky::new(m) else { continue };
            let yv = DVector::from_column_slice(y);
            let alpha = chol.solve(&yv);
            let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let lml = -0.5 * yv.dot(&alpha) - log_det - 0.5 * n as f64 * (2.0 * PI).ln();
            return Ok(Self { hyper, jitter, log_marginal_likelihood: lml, x: x.to_vec(), chol, alpha });
        }
        Err(Error::NotPositiveDefinite { jitter: JITTERS[JITTERS.len() - 1] })
    }

    /// Posterior mean and standard deviation of the latent function.
    pub fn predict_with_std(&self, x: f64) -> (f64, f64) {
        let ks = DVector::from_iterator(self.x.len(), self.x.iter().map(|&xi| self.kernel(xi, x)));
        let mean = ks.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&ks).expect("nonsingular factor");
        let var = (self.kernel(x, x) - v.dot(&v)).max(0.0);
        (mean, var.sqrt())
    }
}

fn rbf(h: &GprHyper, a: f64, b: f64) -> f64 {
    h.signal * (-(a - b).powi(2) / (2.0 * h.length_scale * h.length_scale)).exp()
}

impl Regressor for Gpr {
    fn predict(&self, x: f64) -> f64 {
        let ks = DVector::from_iterator(self.x.len(), self.x.iter().map(|&xi| self.kernel(xi, x)));
        ks.dot(&self.alpha)
    }
}

/// The grid point with the largest log marginal likelihood; ties go to the
/// largest length scale.
pub fn fit_gpr(x: &[f64], y: &[f64], grid: &GprGrid) -> Result<Gpr> {
    check_data(x, y)?;
    let mut best: Option<Gpr> = None;
    let mut last_err = None;
    let mut scales = grid.length_scales.clone();
    scales.sort_by(|a, b| b.total_cmp(a));
    for &length_scale in &scales {
        for &noise in &grid.noises {
            for &signal in &grid.signals {
                match Gpr::fit(x, y, GprHyper { length_scale, noise, signal }) {
                    Ok(g) => {
                        if best.as_ref().is_none_or(|b| g.log_marginal_likelihood > b.log_marginal_likelihood) {
                            best = Some(g);
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Empty("hyperparameter grid".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_with_tiny_noise() {
        let x = [-1.0, -0.5, 0.0, 0.4, 1.0];
        let y = [0.3, -0.2, 0.5, 0.1, -0.7];
        let g = Gpr::fit(&x, &y, GprHyper { length_scale: 0.3, noise: 1e-12, signal: 1.0 }).unwrap();
        for (a, b) in x.iter().zip(y) {
            assert!((g.predict(*a) - b).abs() < 1e-8);
            assert!(g.predict_with_std(*a).1 < 1e-4);
        }
        assert!(g.predict_with_std(3.0).1 > 0.9);
    }

    #[test]
    fn lml_matches_two_point_formula() {
        let h = GprHyper { length_scale: 0.5, noise: 0.1, signal: 1.0 };
        let g = Gpr::fit(&[0.0, 1.0], &[1.0, -1.0], h).unwrap();
        let c = (-2.0f64).exp();
        let (a, d) = (1.1, c);
        let det = a * a - d * d;
        // yᵀK⁻¹y for y = (1, −1): (a + a + 2d)/det
        let quad = (2.0 * a + 2.0 * d) / det;
        let expected = -0.5 * quad - 0.5 * det.ln() - (2.0 * PI).ln();
        assert!((g.log_marginal_likelihood - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_need_jitter() {
        let h = GprHyper { length_scale: 1.0, noise: 0.0, signal: 1.0 };
        let g = Gpr::fit(&[0.0, 0.0], &[1.0, 1.0], h).unwrap();
        assert!(g.jitter > 0.0);
    }
}

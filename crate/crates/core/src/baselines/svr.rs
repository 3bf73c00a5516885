//! ε-insensitive support-vector regression with an RBF kernel, solved by SMO
//! with maximal-violating-pair selection.

use serde::{Deserialize, Serialize};

use super::{check_data, Regressor};
use crate::error::{Error, Result};

/// Stopping tolerance on the maximal KKT violation.
pub const SVR_TOLERANCE: f64 = 1e-6;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyper {
    pub c: f64,
    pub epsilon: f64,
    /// `k = exp(−γ (x−x')²)`
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrGrid {
    pub cs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            cs: vec![1.0, 10.0, 100.0, 1000.0],
            epsilons: vec![1e-4, 1e-3, 1e-2],
            gammas: vec![0.1, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Svr {
    pub hyper: SvrHyper,
    x: Vec<f64>,
    /// `α_i − α*_i`
    coef: Vec<f64>,
    rho: f64,
    /// `m(α) − M(α)` at termination.
    pub violation: f64,
    pub iterations: usize,
}

fn kernel(gamma: f64, a: f64, b: f64) -> f64 {
    (-gamma * (a - b).powi(2)).exp()
}

impl Svr {
    pub fn fit(x: &[f64], y: &[f64], hyper: SvrHyper) -> Result<Self> {
        Self::fit_with(x, y, hyper, SVR_TOLERANCE, 10_000_000)
    }

    /// Dual problem over `β = (α, α*)`:
    /// min ½βᵀQβ + pᵀβ, 0 ≤ β ≤ C, Σ s_t β_t = 0, with `s = (+1…, −1…)`.
    pub fn fit_with(x: &[f64], y: &[f64], hyper: SvrHyper, tol: f64, max_iter: usize) -> Result<Self> {
        check_data(x, y)?;
        let n = x.len();
        let l = 2 * n;
        let c = hyper.c;
        let k: Vec<Vec<f64>> = x.iter().map(|&a| x.iter().map(|&b| kernel(hyper.gamma, a, b)).collect()).collect();
        let s: Vec<f64> = (0..l).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
        let q = |i: usize, j: usize| s[i] * s[j] * k[i % n][j % n];
        let p: Vec<f64> = (0..l).map(|t| if t < n { hyper.epsilon - y[t] } else { hyper.epsilon + y[t - n] }).collect();
        let mut a = vec![0.0; l];
        let mut g = p.clone();

        let mut iterations = 0;
        let violation = loop {
            let (mut gmax, mut i) = (f64::NEG_INFINITY, usize::MAX);
            for t in 0..l {
                let up = if s[t] > 0.0 { a[t] < c } else { a[t] > 0.0 };
                if up && -s[t] * g[t] > gmax {
                    gmax = -s[t] * g[t];
                    i = t;
                }
            }
            let (mut gmin, mut j, mut best) = (f64::INFINITY, usize::MAX, f64::INFINITY);
            for t in 0..l {
                let low = if s[t] > 0.0 { a[t] > 0.0 } else { a[t] < c };
                if !low {
                    continue;
                }
                let v = -s[t] * g[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if i != usize::MAX && b > 0.0 {
                    let quad = (k[i % n][i % n] + k[t % n][t % n] - 2.0 * k[i % n][t % n]).max(TAU);
                    let obj = -b * b / quad;
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
            let gap = gmax - gmin;
            if i == usize::MAX || j == usize::MAX || gap < tol {
                break gap.max(0.0);
            }
            if iterations >= max_iter {
                return Err(Error::NoConvergence { iterations, violation: gap });
            }
            iterations += 1;

            let (old_i, old_j) = (a[i], a[j]);
            if s[i] != s[j] {
                let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
                let delta = (-g[i] - g[j]) / quad;
                let diff = a[i] - a[j];
                a[i] += delta;
                a[j] += delta;
                if diff > 0.0 {
                    if a[j] < 0.0 {
                        a[j] = 0.0;
                        a[i] = diff;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = -diff;
                }
                if diff > 0.0 {
                    if a[i] > c {
                        a[i] = c;
                        a[j] = c - diff;
                    }
                } else if a[j] > c {
                    a[j] = c;
                    a[i] = c + diff;
                }
            } else {
                let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
                let delta = (g[i] - g[j]) / quad;
                let sum = a[i] + a[j];
                a[i] -= delta;
                a[j] += delta;
                if sum > c {
                    if a[i] > c {
                        a[i] = c;
                        a[j] = sum - c;
                    }
                } else if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = sum;
                }
                if sum > c {
                    if a[j] > c {
                        a[j] = c;
                        a[i] = sum - c;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }
            let (di, dj) = (a[i] - old_i, a[j] - old_j);
            for t in 0..l {
                g[t] += q(t, i) * di + q(t, j) * dj;
            }
        };

        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..l {
            let yg = s[t] * g[t];
            if a[t] >= c {
                if s[t] < 0.0 {
                    ub = ub.min(yg)
                } else {
                    lb = lb.max(yg)
                }
            } else if a[t] <= 0.0 {
                if s[t] > 0.0 {
                    ub = ub.min(yg)
                } else {
                    lb = lb.max(yg)
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        let rho = if free > 0 { sum_free / free as f64 } else { 0.5 * (ub + lb) };
        let coef = (0..n).map(|t| a[t] - a[t + n]).collect();
        Ok(Self { hyper, x: x.to_vec(), coef, rho, violation, iterations })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Largest violation of the ε-tube optimality conditions on the training
    /// targets `y`, recomputed from the fitted predictor.
    pub fn kkt_residual(&self, y: &[f64]) -> f64 {
        let (c, eps) = (self.hyper.c, self.hyper.epsilon);
        self.x
            .iter()
            .zip(&self.coef)
            .zip(y)
            .map(|((&x, &beta), &yi)| {
                let r = yi - self.predict(x);
                if beta >= c {
                    (eps - r).max(0.0)
                } else if beta <= -c {
                    (eps + r).max(0.0)
                } else if beta > 0.0 {
                    (r - eps).abs()
                } else if beta < 0.0 {
                    (r + eps).abs()
                } else {
                    (r.abs() - eps).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Intercept `b` of `f(x) = Σ (α_i − α*_i) k(x_i, x) + b`.
    pub fn intercept(&self) -> f64 {
        -self.rho
    }
}

impl Regressor for Svr {
    fn predict(&self, x: f64) -> f64 {
        self.x.iter().zip(&self.coef).map(|(&xi, &c)| c * kernel(self.hyper.gamma, xi, x)).sum::<f64>() - self.rho
    }
}

/// The grid point with the lowest training MSE; ties go to the smallest `C`.
pub fn fit_svr(x: &[f64], y: &[f64], grid: &SvrGrid) -> Result<Svr> {
    check_data(x, y)?;
    let mut best: Option<(f64, Svr)> = None;
    let mut cs = grid.cs.clone();
    cs.sort_by(f64::total_cmp);
    for &c in &cs {
        for &epsilon in &grid.epsilons {
            for &gamma in &grid.gammas {
                let svr = Svr::fit(x, y, SvrHyper { c, epsilon, gamma })?;
                let mse = svr.mse(x, y);
                if best.as_ref().is_none_or(|(b, _)| mse < *b) {
                    best = Some((mse, svr));
                }
            }
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| Error::Empty("hyperparameter grid".into()))
}

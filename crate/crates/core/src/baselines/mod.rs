//! Classical regressors on the scaled `(R, y)` axes.

mod gpr;
mod nn;
mod svr;

pub use gpr::{fit_gpr, Gpr, GprGrid, GprHyper};
pub use nn::{architecture_for_budget, fit_nn, NnFit, NnGrid};
pub use svr::{fit_svr, Svr, SvrGrid, SvrHyper, SVR_TOLERANCE};

/// A fitted one-dimensional regressor.
pub trait Regressor {
    fn predict(&self, x: f64) -> f64;

    fn predict_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict(x)).collect()
    }

    /// Mean squared error on `(xs, ys)`.
    fn mse(&self, xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        xs.iter().zip(ys).map(|(&x, &y)| (self.predict(x) - y).powi(2)).sum::<f64>() / n
    }
}

pub(crate) fn check_data(x: &[f64], y: &[f64]) -> crate::Result<()> {
    if x.is_empty() {
        return Err(crate::Error::Empty("training data".into()));
    }
    if x.len() != y.len() {
        return Err(crate::Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    Ok(())
}

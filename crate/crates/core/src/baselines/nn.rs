//! Plain feed-forward network with a parameter budget.

use serde::{Deserialize, Serialize};

use super::{check_data, Regressor};
use crate::error::{Error, Result};
use crate::model::Mlp;
use crate::rng::{derive_seed, rng_from};
use crate::training::{optimize, Outcome, StopPolicy};

/// Widths `[1, …, 1]` with exactly `budget` parameters: one hidden layer if
/// `3h + 1 = budget` has a solution, else the most balanced two-layer split
/// with `(a + 2)(b + 2) = budget + 3`.
pub fn architecture_for_budget(budget: usize) -> Result<Vec<usize>> {
    if budget >= 4 && (budget - 1).is_multiple_of(3) {
        return Ok(vec![1, (budget - 1) / 3, 1]);
    }
    let target = budget + 3;
    let mut best = None;
    for a in 3..=target {
        if a * a > target {
            break;
        }
        if target.is_multiple_of(a) {
            best = Some((a - 2, target / a - 2));
        }
    }
    match best {
        Some((a, b)) => Ok(vec![1, a, b, 1]),
        None => Err(Error::InvalidArgument(format!("no one- or two-layer network has exactly {budget} parameters"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnGrid {
    pub learning_rates: Vec<f64>,
    pub policy: StopPolicy,
}

impl Default for NnGrid {
    fn default() -> Self {
        let learning_rates = (0..5).map(|k| 10f64.powf(-2.0 + k as f64 / 4.0)).collect();
        Self { learning_rates, policy: StopPolicy::default().with_max_iters(1000) }
    }
}

#[derive(Debug, Clone)]
pub struct NnFit {
    pub mlp: Mlp,
    pub learning_rate: f64,
    pub outcome: Outcome,
}

impl Regressor for NnFit {
    fn predict(&self, x: f64) -> f64 {
        self.mlp.forward(&[x])[0]
    }
}

fn loss_and_grad(mlp: &Mlp, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mut grad = vec![0.0; mlp.param_count()];
    let mut loss = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let trace = mlp.forward_trace(&[xi]);
        let err = trace.output()[0] - yi;
        loss += err * err / n;
        mlp.backward(&trace, &[2.0 * err / n], &mut grad);
    }
    (loss, grad)
}

/// Train one network per learning rate from the same seeded initialization
/// and keep the lowest training loss.
pub fn fit_nn(x: &[f64], y: &[f64], widths: &[usize], grid: &NnGrid, mse_factor: f64, seed: u64) -> Result<NnFit> {
    check_data(x, y)?;
    let init = Mlp::init_uniform(widths.to_vec(), &mut rng_from(derive_seed(seed, &[0])))?;
    let mut best: Option<NnFit> = None;
    for &lr in &grid.learning_rates {
        let mut work = init.clone();
        let outcome = optimize(init.params().to_vec(), lr, &grid.policy, mse_factor, |p| {
            work.params_mut().copy_from_slice(p);
            Ok(loss_and_grad(&work, x, y))
        })?;
        if best.as_ref().is_none_or(|b| outcome.best_loss < b.outcome.best_loss) {
            let mlp = Mlp::new(widths.to_vec(), outcome.params.clone())?;
            best = Some(NnFit { mlp, learning_rate: lr, outcome });
        }
    }
    best.ok_or_else(|| Error::Empty("learning-rate grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mlp_param_count;

    #[test]
    fn architectures_match_budget() {
        for budget in [4, 10, 34, 55, 69, 100] {
            let w = architecture_for_budget(budget).unwrap();
            assert_eq!(mlp_param_count(&w), budget, "{w:?}");
        }
        assert_eq!(architecture_for_budget(55).unwrap(), vec![1, 18, 1]);
        assert_eq!(architecture_for_budget(69).unwrap(), vec![1, 6, 7, 1]);
    }

    #[test]
    fn default_rates_are_log_spaced() {
        let g = NnGrid::default();
        assert!((g.learning_rates[0] - 0.01).abs() < 1e-15);
        assert!((g.learning_rates[4] - 0.1).abs() < 1e-15);
        let ratios: Vec<f64> = g.learning_rates.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }
}

//! Replicated benchmark runs, aggregate statistics and the shot study.

mod sampling;
mod shots;
mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sampling::{equal_indices, regions, sample_training_set, Strategy};
pub use shots::{
    checkpoint_mse, energy_variances, sampled_qwc_energy, shot_study, Curve, EnergyVariance, ShotRow, ShotStudyConfig,
};
pub use stats::{
    aggregate_boxplot, aggregate_ranking, average_ranks, mean_sem, quantile_sorted, BoxRow, BoxStats, RankRow,
};

use crate::ansatz::{build_observable_basis, build_siqnn, CircuitTemplate};
use crate::baselines::{architecture_for_budget, fit_gpr, fit_nn, fit_svr, GprGrid, NnGrid, Regressor, SvrGrid};
use crate::error::{Error, Result};
use crate::model::{hidden_width_for_budget, mlp_param_count, HybridModel};
use crate::rng::derive_seed;
use crate::spectra::Dataset;
use crate::training::{train_two_stage, TrainConfig, TrainSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Circuit with direct weights after pretraining.
    Siqnn,
    /// Circuit with the weight network after end-to-end training.
    SiqnnNn,
    Nn,
    Gpr,
    Svr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Siqnn, ModelKind::SiqnnNn, ModelKind::Nn, ModelKind::Gpr, ModelKind::Svr];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Siqnn => "siqnn",
            ModelKind::SiqnnNn => "siqnn_nn",
            ModelKind::Nn => "nn",
            ModelKind::Gpr => "gpr",
            ModelKind::Svr => "svr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub models: Vec<ModelKind>,
    pub ls: Vec<usize>,
    pub replicates: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub train: TrainConfig,
    pub nn: NnGrid,
    pub gpr: GprGrid,
    pub svr: SvrGrid,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            models: ModelKind::ALL.to_vec(),
            ls: vec![4, 5, 6, 7, 8],
            replicates: 50,
            strategy: Strategy::Bo,
            seed: 0,
            train: TrainConfig::default(),
            nn: NnGrid::default(),
            gpr: GprGrid::default(),
            svr: SvrGrid::default(),
        }
    }
}

/// Outcome of one model on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub molecule: String,
    pub model: String,
    pub target: String,
    pub l: usize,
    pub replicate: usize,
    pub seed: u64,
    /// Physical units squared, on the complement of the training set.
    pub test_mse: Option<f64>,
    pub train_mse: Option<f64>,
    pub stop_reason: Option<String>,
    /// Training indices joined by `;`.
    pub train_indices: String,
    #[serde(skip_serializing, default)]
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn indices(&self) -> Vec<usize> {
        self.train_indices.split(';').filter(|s| !s.is_empty()).filter_map(|s| s.parse().ok()).collect()
    }
}

/// Total parameters of the circuit model with its weight network.
pub fn siqnn_nn_param_count(template: &CircuitTemplate, train: &TrainConfig) -> Result<usize> {
    let k = build_observable_basis(template)?.len();
    let h = train.hidden.unwrap_or_else(|| hidden_width_for_budget(k, train.mlp_budget));
    Ok(template.param_count + mlp_param_count(&[1, h, k]))
}

/// One `(dataset, L, replicate)` cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub dataset: usize,
    pub l: usize,
    pub replicate: usize,
}

pub fn cells(n_datasets: usize, config: &BenchConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for dataset in 0..n_datasets {
        for &l in &config.ls {
            for replicate in 0..config.replicates {
                out.push(Cell { dataset, l, replicate });
            }
        }
    }
    out
}

/// Train and score every model on every cell. Failures are recorded in the
/// `error` column and the matrix continues.
pub fn run_matrix(datasets: &[Dataset], config: &BenchConfig) -> Vec<RunRecord> {
    cells(datasets.len(), config).into_par_iter().flat_map_iter(|c| run_cell(&datasets[c.dataset], c, config)).collect()
}

fn mse(pred: &[f64], y: &[f64], factor: f64) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64 * factor
}

/// Models of one cell, in the order of `config.models`.
pub fn run_cell(ds: &Dataset, cell: Cell, config: &BenchConfig) -> Vec<RunRecord> {
    let sample_seed = derive_seed(config.seed, &[cell.dataset as u64, cell.l as u64, cell.replicate as u64]);
    let record = |model: ModelKind, seed: u64| RunRecord {
        molecule: ds.molecule.clone(),
        model: model.to_string(),
        target: ds.target.to_string(),
        l: cell.l,
        replicate: cell.replicate,
        seed,
        test_mse: None,
        train_mse: None,
        stop_reason: None,
        train_indices: String::new(),
        wall_time_s: 0.0,
        error: None,
    };
    let r = ds.r_scaled();
    let y = ds.y_scaled();
    let train = match sample_training_set(&r, &y, cell.l, config.strategy, sample_seed) {
        Ok(t) => t,
        Err(e) => {
            return config
                .models
                .iter()
                .map(|&m| RunRecord { error: Some(e.to_string()), ..record(m, sample_seed) })
                .collect()
        }
    };
    let indices = train.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";");
    let test: Vec<usize> = (0..ds.len()).filter(|k| !train.contains(k)).collect();
    let pick = |v: &[f64], idx: &[usize]| idx.iter().map(|&k| v[k]).collect::<Vec<f64>>();
    let (r_train, y_train, r_test, y_test) = (pick(&r, &train), pick(&y, &train), pick(&r, &test), pick(&y, &test));
    let factor = ds.scaling.mse_factor();

    let mut out = Vec::new();
    let mut quantum: Option<(f64, Result<QuantumFit, String>)> = None;
    let qseed = quantum_seed(sample_seed);
    for (mi, &model) in config.models.iter().enumerate() {
        let seed = match model {
            ModelKind::Siqnn | ModelKind::SiqnnNn => qseed,
            _ => derive_seed(sample_seed, &[mi as u64]),
        };
        let start = Instant::now();
        let result: Result<(Vec<f64>, Vec<f64>, Option<String>), String> = match model {
            ModelKind::Siqnn | ModelKind::SiqnnNn => {
                if quantum.is_none() {
                    let t0 = Instant::now();
                    let res =
                        train_quantum(ds, &train, &r, &y, &config.train, factor, qseed).map_err(|e| e.to_string());
                    quantum = Some((t0.elapsed().as_secs_f64(), res));
                }
                let (_, res) = quantum.as_ref().expect("trained above");
                match res {
                    Ok(q) => {
                        let (m, stop) =
                            if model == ModelKind::Siqnn { (&q.siqnn, &q.stop[0]) } else { (&q.siqnn_nn, &q.stop[1]) };
                        let predict = |idx: &[usize]| -> Result<Vec<f64>> {
                            idx.iter().map(|&k| m.forward(&ds.states[k], r[k])).collect()
                        };
                        predict(&train)
                            .and_then(|a| Ok((a, predict(&test)?, Some(stop.clone()))))
                            .map_err(|e| e.to_string())
                    }
                    Err(e) => Err(e.clone()),
                }
            }
            ModelKind::Nn => {
                let budget = build_siqnn(ds.n_qubits() / 2).and_then(|t| siqnn_nn_param_count(&t, &config.train));
                budget
                    .and_then(architecture_for_budget)
                    .and_then(|w| {
                        let fit = fit_nn(&r_train, &y_train, &w, &config.nn, factor, seed)?;
                        Ok((
                            fit.predict_many(&r_train),
                            fit.predict_many(&r_test),
                            Some(fit.outcome.stop.as_str().into()),
                        ))
                    })
                    .map_err(|e| e.to_string())
            }
            ModelKind::Gpr => fit_gpr(&r_train, &y_train, &config.gpr)
                .map(|g| (g.predict_many(&r_train), g.predict_many(&r_test), None))
                .map_err(|e| e.to_string()),
            ModelKind::Svr => fit_svr(&r_train, &y_train, &config.svr)
                .map(|s| (s.predict_many(&r_train), s.predict_many(&r_test), None))
                .map_err(|e| e.to_string()),
        };
        let mut wall = start.elapsed().as_secs_f64();
        if let (ModelKind::Siqnn | ModelKind::SiqnnNn, Some((t, _))) = (model, &quantum) {
            wall = *t;
        }
        let mut rec = RunRecord { train_indices: indices.clone(), wall_time_s: wall, ..record(model, seed) };
        match result {
            Ok((p_train, p_test, stop)) => {
                rec.train_mse = Some(mse(&p_train, &y_train, factor));
                rec.test_mse = Some(mse(&p_test, &y_test, factor));
                rec.stop_reason = stop;
            }
            Err(e) => rec.error = Some(e),
        }
        out.push(rec);
    }
    out
}

/// Training seed of both circuit models in a cell; the records carry it so a
/// run can be repeated with [`train_two_stage`].
fn quantum_seed(sample_seed: u64) -> u64 {
    derive_seed(sample_seed, &[u64::MAX])
}

struct QuantumFit {
    siqnn: HybridModel,
    siqnn_nn: HybridModel,
    stop: [String; 2],
}

fn train_quantum(
    ds: &Dataset,
    train: &[usize],
    r: &[f64],
    y: &[f64],
    config: &TrainConfig,
    factor: f64,
    seed: u64,
) -> Result<QuantumFit> {
    let template = build_siqnn(ds.n_qubits() / 2)?;
    let data = TrainSet::new(
        train.iter().map(|&k| ds.states[k].clone()).collect(),
        train.iter().map(|&k| r[k]).collect(),
        train.iter().map(|&k| y[k]).collect(),
    )?;
    let run = train_two_stage(&template, &data, config, factor, seed)?;
    Ok(QuantumFit {
        siqnn: run.siqnn,
        siqnn_nn: run.siqnn_nn,
        stop: [run.pretrain.stop.as_str().into(), run.end_to_end.stop.as_str().into()],
    })
}

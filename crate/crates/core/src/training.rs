//! Adam, the stopping rules, and the two training stages of the hybrid model.

use std::f64::consts::FRAC_PI_8;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitTemplate;
use crate::error::{Error, Result};
use crate::model::{hidden_width_for_budget, Head, HybridModel, Mlp, ModelGradient};
use crate::rng::{derive_seed, rng_from};
use crate::simulator::{parameter_shift_gradient, sample_z_basis, StateVector};

/// Bias-corrected Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// The three stopping criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopPolicy {
    /// Physical units squared (Ha² or (e·a₀)²).
    pub target_loss: f64,
    /// Iterations allowed without a relative improvement of `min_improvement`.
    pub patience: usize,
    pub min_improvement: f64,
    pub max_iters: usize,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self { target_loss: 1e-6, patience: 200, min_improvement: 0.01, max_iters: 1000 }
    }
}

impl StopPolicy {
    pub fn with_max_iters(self, max_iters: usize) -> Self {
        Self { max_iters, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    PatienceExhausted,
    MaxIters,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::TargetReached => "target_reached",
            StopReason::PatienceExhausted => "patience_exhausted",
            StopReason::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub loss_scaled: f64,
    pub loss_physical: f64,
}

/// Result of one optimization run; `params` are the best seen.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub params: Vec<f64>,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub iterations: usize,
    pub stop: StopReason,
    pub log: Vec<LogEntry>,
}

impl Outcome {
    /// Best loss in physical units, given the dataset's `(Δy/2)²`.
    pub fn best_loss_physical(&self, mse_factor: f64) -> f64 {
        self.best_loss * mse_factor
    }
}

/// Adam descent on `f(params) → (loss, gradient)` with the stopping rules of
/// `policy`. Losses are in scaled units; `mse_factor` converts them.
pub fn optimize(
    init: Vec<f64>,
    lr: f64,
    policy: &StopPolicy,
    mse_factor: f64,
    mut f: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
) -> Result<Outcome> {
    let mut params = init;
    let mut adam = Adam::new(lr, params.len());
    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut anchor = f64::INFINITY;
    let mut last_improvement = 0usize;
    let mut log = Vec::new();
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    for it in 0..policy.max_iters {
        let (loss, grad) = f(&params)?;
        iterations = it + 1;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: it, params });
        }
        log.push(LogEntry { iteration: it, loss_scaled: loss, loss_physical: loss * mse_factor });
        if loss < best.0 {
            best = (loss, params.clone(), it);
        }
        if loss * mse_factor <= policy.target_loss {
            stop = StopReason::TargetReached;
            break;
        }
        if loss < anchor * (1.0 - policy.min_improvement) {
            anchor = loss;
            last_improvement = it;
        } else if it - last_improvement >= policy.patience {
            stop = StopReason::PatienceExhausted;
            break;
        }
        adam.step(&mut params, &grad);
    }
    Ok(Outcome { params: best.1, best_loss: best.0, best_iteration: best.2, iterations, stop, log })
}

/// Training points on scaled axes.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub states: Vec<StateVector>,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
}

impl TrainSet {
    pub fn new(states: Vec<StateVector>, r: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("training set".into()));
        }
        if r.len() != states.len() || y.len() != states.len() {
            return Err(Error::LengthMismatch { expected: states.len(), got: r.len().min(y.len()) });
        }
        Ok(Self { states, r, y })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Exact MSE and its gradient over `[θ, head]`.
pub fn model_loss_and_grad(model: &HybridModel, data: &TrainSet) -> Result<(f64, Vec<f64>)> {
    let n = data.len() as f64;
    let mut grad = ModelGradient::zeros(model);
    let mut loss = 0.0;
    for k in 0..data.len() {
        let pass = model.pass(&data.states[k], data.r[k])?;
        let err = pass.y - data.y[k];
        loss += err * err / n;
        model.backward_pass(pass, 2.0 * err / n, &mut grad)?;
    }
    Ok((loss, grad.flat()))
}

pub fn model_loss(model: &HybridModel, data: &TrainSet) -> Result<f64> {
    let mut loss = 0.0;
    for k in 0..data.len() {
        let err = model.forward(&data.states[k], data.r[k])? - data.y[k];
        loss += err * err;
    }
    Ok(loss / data.len() as f64)
}

/// Settings of the two training stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub pretrain_lr: f64,
    pub pretrain: StopPolicy,
    pub end_to_end_lr: f64,
    pub end_to_end: StopPolicy,
    /// Hidden width of the weight network; `None` picks the largest width
    /// within `mlp_budget` parameters.
    pub hidden: Option<usize>,
    pub mlp_budget: usize,
    pub init: HeadInit,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            pretrain_lr: 0.5,
            pretrain: StopPolicy::default().with_max_iters(1000),
            end_to_end_lr: 0.02,
            end_to_end: StopPolicy::default().with_max_iters(2000),
            hidden: None,
            mlp_budget: 41,
            init: HeadInit::WarmStart,
        }
    }
}

/// Initialization of the weight network for end-to-end training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadInit {
    /// Every weight and bias uniform in `±1/√fan_in`.
    Random,
    /// Hidden layer uniform in `±1/√fan_in`, output weights zero and output
    /// bias equal to the pretrained direct weights.
    WarmStart,
}

/// Initial model for pretraining: `θ ~ U[−π/8, π/8]`, identity weight at the
/// target mean and all other weights zero.
pub fn initial_direct_model(template: &CircuitTemplate, y_mean: f64, seed: u64) -> Result<HybridModel> {
    let mut rng = rng_from(seed);
    let theta = (0..template.param_count).map(|_| rng.random_range(-FRAC_PI_8..=FRAC_PI_8)).collect();
    let k = crate::ansatz::build_observable_basis(template)?.len();
    let mut w = vec![0.0; k];
    w[0] = y_mean;
    HybridModel::new(template.clone(), theta, Head::Direct { w })
}

/// Stage one: circuit angles and direct weights.
pub fn pretrain_siqnn(
    model: &HybridModel,
    data: &TrainSet,
    lr: f64,
    policy: &StopPolicy,
    mse_factor: f64,
) -> Result<(HybridModel, Outcome)> {
    if !matches!(model.head(), Head::Direct { .. }) {
        return Err(Error::InvalidArgument("pretraining needs a direct-weight head".into()));
    }
    fit(model, data, lr, policy, mse_factor)
}

fn fit(
    model: &HybridModel,
    data: &TrainSet,
    lr: f64,
    policy: &StopPolicy,
    mse_factor: f64,
) -> Result<(HybridModel, Outcome)> {
    let mut work = model.clone();
    let outcome = optimize(model.flat_params(), lr, policy, mse_factor, |p| {
        work.set_flat_params(p)?;
        model_loss_and_grad(&work, data)
    })?;
    let mut best = model.clone();
    best.set_flat_params(&outcome.params)?;
    Ok((best, outcome))
}

/// Replace a direct head by a weight network according to `init`.
pub fn attach_mlp(pretrained: &HybridModel, hidden: usize, init: HeadInit, seed: u64) -> Result<HybridModel> {
    let w = match pretrained.head() {
        Head::Direct { w } => w.clone(),
        Head::Mlp { .. } => return Err(Error::InvalidArgument("model already has a network head".into())),
    };
    let widths = vec![1, hidden, w.len()];
    let mut rng = rng_from(seed);
    let mut mlp = Mlp::init_uniform(widths, &mut rng)?;
    if init == HeadInit::WarmStart {
        let n = mlp.param_count();
        let k = w.len();
        let p = mlp.params_mut();
        // output layer: k×hidden weights then k biases
        p[n - k - k * hidden..n - k].fill(0.0);
        p[n - k..].copy_from_slice(&w);
    }
    pretrained.with_head(Head::Mlp { mlp })
}

/// Stage two: circuit angles and weight network jointly.
pub fn train_end_to_end(
    model: &HybridModel,
    data: &TrainSet,
    lr: f64,
    policy: &StopPolicy,
    mse_factor: f64,
) -> Result<(HybridModel, Outcome)> {
    if !matches!(model.head(), Head::Mlp { .. }) {
        return Err(Error::InvalidArgument("end-to-end training needs a network head".into()));
    }
    fit(model, data, lr, policy, mse_factor)
}

/// Both stages of one seeded run.
#[derive(Debug, Clone)]
pub struct TwoStage {
    pub siqnn: HybridModel,
    pub pretrain: Outcome,
    pub siqnn_nn: HybridModel,
    pub end_to_end: Outcome,
}

pub fn train_two_stage(
    template: &CircuitTemplate,
    data: &TrainSet,
    config: &TrainConfig,
    mse_factor: f64,
    seed: u64,
) -> Result<TwoStage> {
    let mean = data.y.iter().sum::<f64>() / data.len() as f64;
    let init = initial_direct_model(template, mean, derive_seed(seed, &[0]))?;
    let (siqnn, pretrain) = pretrain_siqnn(&init, data, config.pretrain_lr, &config.pretrain, mse_factor)?;
    let k = siqnn.basis().len();
    let hidden = config.hidden.unwrap_or_else(|| hidden_width_for_budget(k, config.mlp_budget));
    let start = attach_mlp(&siqnn, hidden, config.init, derive_seed(seed, &[1]))?;
    let (siqnn_nn, end_to_end) = train_end_to_end(&start, data, config.end_to_end_lr, &config.end_to_end, mse_factor)?;
    Ok(TwoStage { siqnn, pretrain, siqnn_nn, end_to_end })
}

/// Shot-noise settings for [`train_shots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

/// Model output from one `shots`-sample measurement with per-rotation angles.
fn sampled_output(
    model: &HybridModel,
    psi0: &StateVector,
    angles: &[f64],
    w: &[f64],
    shots: u64,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let mut psi = psi0.clone();
    model.circuit().apply_angles(&mut psi, angles)?;
    let counts = sample_z_basis(&psi, shots, seed)?;
    let e = model.basis().estimate(&counts)?;
    Ok((w.iter().zip(&e).map(|(a, b)| a * b).sum(), e))
}

/// Loss and gradient estimated from measurements only: every model output
/// is a `shots`-sample estimate and circuit gradients use the shift rule.
pub fn shot_loss_and_grad(model: &HybridModel, data: &TrainSet, shots: u64, seed: u64) -> Result<(f64, Vec<f64>)> {
    let n = data.len() as f64;
    let mut grad = ModelGradient::zeros(model);
    let mut loss = 0.0;
    let angles = model.circuit().angles(model.theta())?;
    let mut draw = 0u64;
    let mut next_seed = || {
        draw += 1;
        derive_seed(seed, &[draw])
    };
    for k in 0..data.len() {
        let psi0 = &data.states[k];
        let r = data.r[k];
        let w = model.weights(r);
        let (y, e) = sampled_output(model, psi0, &angles, &w, shots, next_seed())?;
        let err = y - data.y[k];
        loss += err * err / n;
        let dl_dy = 2.0 * err / n;
        let dw: Vec<f64> = e.iter().map(|x| dl_dy * x).collect();
        match model.head() {
            Head::Direct { .. } => {
                for (g, d) in grad.head.iter_mut().zip(&dw) {
                    *g += d;
                }
            }
            Head::Mlp { mlp } => {
                mlp.backward(&mlp.forward_trace(&[r]), &dw, &mut grad.head);
            }
        }
        let dy = parameter_shift_gradient(model.circuit(), model.theta(), |a| {
            Ok(sampled_output(model, psi0, a, &w, shots, next_seed())?.0)
        })?;
        for (g, d) in grad.theta.iter_mut().zip(dy) {
            *g += dl_dy * d;
        }
    }
    Ok((loss, grad.flat()))
}

/// [`fit`] with measurement-estimated losses and gradients.
pub fn train_shots(
    model: &HybridModel,
    data: &TrainSet,
    lr: f64,
    policy: &StopPolicy,
    mse_factor: f64,
    shots: ShotConfig,
) -> Result<(HybridModel, Outcome)> {
    let mut work = model.clone();
    let mut iteration = 0u64;
    let outcome = optimize(model.flat_params(), lr, policy, mse_factor, |p| {
        work.set_flat_params(p)?;
        iteration += 1;
        shot_loss_and_grad(&work, data, shots.shots, derive_seed(shots.seed, &[iteration]))
    })?;
    let mut best = model.clone();
    best.set_flat_params(&outcome.params)?;
    Ok((best, outcome))
}

/// Both stages with measurement-estimated losses and gradients.
pub fn train_two_stage_shots(
    template: &CircuitTemplate,
    data: &TrainSet,
    config: &TrainConfig,
    mse_factor: f64,
    seed: u64,
    shots: u64,
) -> Result<TwoStage> {
    let mean = data.y.iter().sum::<f64>() / data.len() as f64;
    let init = initial_direct_model(template, mean, derive_seed(seed, &[0]))?;
    let noise = |stage: u64| ShotConfig { shots, seed: derive_seed(seed, &[2, stage]) };
    let (siqnn, pretrain) = train_shots(&init, data, config.pretrain_lr, &config.pretrain, mse_factor, noise(0))?;
    let k = siqnn.basis().len();
    let hidden = config.hidden.unwrap_or_else(|| hidden_width_for_budget(k, config.mlp_budget));
    let start = attach_mlp(&siqnn, hidden, config.init, derive_seed(seed, &[1]))?;
    let (siqnn_nn, end_to_end) =
        train_shots(&start, data, config.end_to_end_lr, &config.end_to_end, mse_factor, noise(1))?;
    Ok(TwoStage { siqnn, pretrain, siqnn_nn, end_to_end })
}

/// Write `iteration,loss_scaled,loss_physical` rows.
pub fn write_log(log: &[LogEntry], mut out: impl Write) -> Result<()> {
    writeln!(out, "iteration,loss_scaled,loss_physical")?;
    for e in log {
        writeln!(out, "{},{:e},{:e}", e.iteration, e.loss_scaled, e.loss_physical)?;
    }
    Ok(())
}

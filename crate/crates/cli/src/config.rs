//! Run configuration: a TOML file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use siqnn::baselines::{GprGrid, NnGrid, SvrGrid};
use siqnn::bench::{BenchConfig, ModelKind, Strategy};
use siqnn::spectra::{AnalysisOptions, TargetSpec, TrackOptions};
use siqnn::training::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub output: PathBuf,
    pub data: DataConfig,
    pub train: TrainSection,
    pub bench: BenchSection,
    pub shots: ShotSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 0,
            output: PathBuf::from("out"),
            data: DataConfig::default(),
            train: TrainSection::default(),
            bench: BenchSection::default(),
            shots: ShotSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub bundle: Option<PathBuf>,
    /// Target specs such as `dE:T2`; empty selects the default target set.
    pub targets: Vec<TargetSpec>,
    /// Restrict the scan to `[lo, hi]` Å.
    pub range: Option<[f64; 2]>,
    /// Excited states per spin class in the default target set.
    pub per_class: usize,
    /// TDM norm targets whose maximum stays below this are dropped.
    pub tdm_floor: f64,
    pub analysis: AnalysisOptions,
    pub track: TrackOptions,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            bundle: None,
            targets: Vec::new(),
            range: None,
            per_class: 4,
            tdm_floor: 1e-3,
            analysis: AnalysisOptions::default(),
            track: TrackOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Training-set size of the `train` command.
    pub l: usize,
    pub strategy: Strategy,
    pub stages: TrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { l: 6, strategy: Strategy::Equal, stages: TrainConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub models: Vec<ModelKind>,
    pub ls: Vec<usize>,
    pub replicates: usize,
    pub strategy: Strategy,
    pub nn: NnGrid,
    pub gpr: GprGrid,
    pub svr: SvrGrid,
}

impl Default for BenchSection {
    fn default() -> Self {
        let b = BenchConfig::default();
        Self {
            models: b.models,
            ls: b.ls,
            replicates: b.replicates,
            strategy: b.strategy,
            nn: b.nn,
            gpr: b.gpr,
            svr: b.svr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShotSection {
    pub grid: Vec<u64>,
    /// Repetitions per shot count.
    pub seeds: usize,
    pub high_shots: u64,
    /// Also train with sampled expectations at every shot count.
    pub retrain: bool,
    /// Checkpoint written by `train`; trained afresh when absent.
    pub checkpoint: Option<PathBuf>,
}

impl Default for ShotSection {
    fn default() -> Self {
        Self {
            grid: vec![1_000, 3_000, 10_000, 30_000, 100_000],
            seeds: 20,
            high_shots: 100_000,
            retrain: false,
            checkpoint: None,
        }
    }
}

/// Flags shared by every pipeline command; each overrides its config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Integral bundle (JSON).
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Target such as `dE:T2` or `tdm:S1`; repeatable.
    #[arg(long = "target")]
    pub targets: Vec<TargetSpec>,
    /// Training-set size of the `train` command.
    #[arg(long)]
    pub l: Option<usize>,
    /// Training-set sizes of the benchmark, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ls: Option<Vec<usize>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Sampling strategy: bo, equal or random.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Benchmark models, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ModelKind>>,
    /// Shot counts of the shot study, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub shots: Option<Vec<u64>>,
    /// Model checkpoint for the shot study.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Target loss of both training stages (physical units squared).
    #[arg(long)]
    pub target_loss: Option<f64>,
    #[arg(long)]
    pub pretrain_iters: Option<usize>,
    #[arg(long)]
    pub end_to_end_iters: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = o.threads {
            c.threads = v;
        }
        if let Some(v) = &o.output {
            c.output = v.clone();
        }
        if let Some(v) = &o.bundle {
            c.data.bundle = Some(v.clone());
        }
        if !o.targets.is_empty() {
            c.data.targets = o.targets.clone();
        }
        if let Some(v) = o.l {
            c.train.l = v;
        }
        if let Some(v) = &o.ls {
            c.bench.ls = v.clone();
        }
        if let Some(v) = o.replicates {
            c.bench.replicates = v;
        }
        if let Some(v) = o.strategy {
            c.bench.strategy = v;
            c.train.strategy = v;
        }
        if let Some(v) = &o.models {
            c.bench.models = v.clone();
        }
        if let Some(v) = &o.shots {
            c.shots.grid = v.clone();
        }
        if let Some(v) = &o.checkpoint {
            c.shots.checkpoint = Some(v.clone());
        }
        if let Some(v) = o.target_loss {
            c.train.stages.pretrain.target_loss = v;
            c.train.stages.end_to_end.target_loss = v;
        }
        if let Some(v) = o.pretrain_iters {
            c.train.stages.pretrain.max_iters = v;
        }
        if let Some(v) = o.end_to_end_iters {
            c.train.stages.end_to_end.max_iters = v;
        }
        Ok(c)
    }

    pub fn bundle(&self) -> Result<&Path> {
        let Some(p) = &self.data.bundle else { bail!("no integral bundle given (set data.bundle or pass --bundle)") };
        if !p.exists() {
            bail!("bundle {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn bench_config(&self) -> BenchConfig {
        BenchConfig {
            models: self.bench.models.clone(),
            ls: self.bench.ls.clone(),
            replicates: self.bench.replicates,
            strategy: self.bench.strategy,
            seed: self.seed,
            train: self.train.stages,
            nn: self.bench.nn.clone(),
            gpr: self.bench.gpr.clone(),
            svr: self.bench.svr.clone(),
        }
    }

    /// SHA-256 of the settings that determine results; the output directory
    /// and thread count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        c.threads = 0;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

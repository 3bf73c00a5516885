//! The pipeline subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use siqnn::ansatz::build_siqnn;
use siqnn::bench::{
    aggregate_boxplot, aggregate_ranking, run_matrix, sample_training_set, shot_study, ShotStudyConfig,
};
use siqnn::model::{Checkpoint, HybridModel};
use siqnn::operators::{build_qubit_hamiltonian, IntegralBundle, PauliSum};
use siqnn::rng::derive_seed;
use siqnn::spectra::{analyze_bundle, build_dataset, Dataset, ScanAnalysis, TargetSpec};
use siqnn::training::{train_two_stage, write_log, Outcome, TrainSet};

use crate::config::RunConfig;
use crate::output::{slug, Out, VERSION};

/// Print the validation report; true when the bundle is valid.
pub fn validate(path: &Path) -> Result<bool> {
    let bundle = IntegralBundle::load(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let violations = bundle.violations();
    if violations.is_empty() {
        let (n_orb, n_elec) = bundle.geometries.first().map_or((0, 0), |g| (g.n_orb, g.n_elec));
        println!(
            "ok: {} with {} geometries, n_orb={n_orb}, n_elec={n_elec}, R {:.3}..{:.3} Å",
            bundle.molecule,
            bundle.geometries.len(),
            bundle.grid().first().copied().unwrap_or(f64::NAN),
            bundle.grid().last().copied().unwrap_or(f64::NAN),
        );
        return Ok(true);
    }
    for v in &violations {
        println!("violation: {v}");
    }
    println!("{} violation(s) in {}", violations.len(), path.display());
    Ok(false)
}

fn load(config: &RunConfig) -> Result<(IntegralBundle, ScanAnalysis)> {
    let path = config.bundle()?;
    let bundle = IntegralBundle::load(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let analysis = analyze_bundle(&bundle, config.data.analysis, config.data.track)
        .map_err(|e| anyhow!("analyzing {}: {e}", path.display()))?;
    Ok((bundle, analysis))
}

fn targets(config: &RunConfig, analysis: &ScanAnalysis) -> Vec<TargetSpec> {
    if config.data.targets.is_empty() {
        analysis.default_targets(config.data.per_class, config.data.tdm_floor)
    } else {
        config.data.targets.clone()
    }
}

fn dataset(config: &RunConfig, analysis: &ScanAnalysis, target: &TargetSpec) -> Result<Dataset> {
    let range = config.data.range.map(|[lo, hi]| (lo, hi));
    build_dataset(analysis, target, range, config.data.track).map_err(|e| anyhow!("target {target}: {e}"))
}

fn units(target: &TargetSpec) -> String {
    format!("units: R in Angstrom, {target} in {}, MSE in ({})^2", target.unit(), target.unit())
}

#[derive(Serialize)]
struct TargetRow {
    target: String,
    unit: &'static str,
    status: String,
    min_overlap: f64,
    y_min: f64,
    y_max: f64,
    points: usize,
}

#[derive(Serialize)]
struct DataRow {
    index: usize,
    r: f64,
    y: f64,
    r_scaled: f64,
    y_scaled: f64,
}

pub fn build_datasets(config: &RunConfig) -> Result<()> {
    let (_, analysis) = load(config)?;
    let out = Out::new(config)?;
    let mut summary = Vec::new();
    for target in targets(config, &analysis) {
        let series = analysis.series(&target).map_err(|e| anyhow!("target {target}: {e}"))?;
        let min_overlap = series.overlaps.iter().copied().fold(1.0, f64::min);
        let row = |status: String, ys: &[f64], points| TargetRow {
            target: target.to_string(),
            unit: target.unit(),
            status,
            min_overlap,
            y_min: ys.iter().copied().fold(f64::INFINITY, f64::min),
            y_max: ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            points,
        };
        match dataset(config, &analysis, &target) {
            Ok(ds) => {
                let (rs, ys) = (ds.r_scaled(), ds.y_scaled());
                let rows = (0..ds.len()).map(|k| DataRow {
                    index: k,
                    r: ds.r[k],
                    y: ds.y[k],
                    r_scaled: rs[k],
                    y_scaled: ys[k],
                });
                let name = format!("dataset_{}", slug(&target.to_string()));
                out.csv(&format!("{name}.csv"), &[&units(&target)], rows)?;
                ds.save(out.path(&name))?;
                summary.push(row("ok".into(), &ds.y, ds.len()));
            }
            Err(e) => {
                eprintln!("skipping {e}");
                summary.push(row(format!("skipped: {e}"), &series.values, series.values.len()));
            }
        }
    }
    out.csv("targets.csv", &[], &summary)?;
    for t in &summary {
        println!("{:<8} {:<6} {}", t.target, t.unit, t.status);
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct PredictionRow {
    pub r: f64,
    pub exact: f64,
    pub siqnn: f64,
    pub siqnn_nn: f64,
    pub train: u8,
}

#[derive(Serialize)]
struct SummaryRow {
    target: String,
    model: String,
    train_mse: f64,
    test_mse: f64,
    stop_reason: &'static str,
    iterations: usize,
}

struct Trained {
    ds: Dataset,
    train: Vec<usize>,
    siqnn: HybridModel,
    siqnn_nn: HybridModel,
    stages: [Outcome; 2],
    train_seed: u64,
}

fn train_one(config: &RunConfig, analysis: &ScanAnalysis, target: &TargetSpec, k: usize) -> Result<Trained> {
    let ds = dataset(config, analysis, target)?;
    let (r, y) = (ds.r_scaled(), ds.y_scaled());
    let train =
        sample_training_set(&r, &y, config.train.l, config.train.strategy, derive_seed(config.seed, &[k as u64, 0]))?;
    let data = TrainSet::new(
        train.iter().map(|&i| ds.states[i].clone()).collect(),
        train.iter().map(|&i| r[i]).collect(),
        train.iter().map(|&i| y[i]).collect(),
    )?;
    let template = build_siqnn(ds.n_qubits() / 2)?;
    let train_seed = derive_seed(config.seed, &[k as u64, 1]);
    let run = train_two_stage(&template, &data, &config.train.stages, ds.scaling.mse_factor(), train_seed)?;
    Ok(Trained {
        ds,
        train,
        siqnn: run.siqnn,
        siqnn_nn: run.siqnn_nn,
        stages: [run.pretrain, run.end_to_end],
        train_seed,
    })
}

fn predict(model: &HybridModel, ds: &Dataset) -> Result<Vec<f64>> {
    let r = ds.r_scaled();
    (0..ds.len()).map(|k| Ok(ds.scaling.unscale_y(model.forward(&ds.states[k], r[k])?))).collect()
}

fn mse(pred: &[f64], y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&k| (pred[k] - y[k]).powi(2)).sum::<f64>() / idx.len() as f64
}

fn save_checkpoint(out: &Out, t: &Trained, model: &HybridModel, name: &str) -> Result<()> {
    let mut c = model.checkpoint(Some(t.ds.scaling));
    let meta = [
        ("version", VERSION.to_string()),
        ("config_hash", out.hash.clone()),
        ("seed", out.seed.to_string()),
        ("train_seed", t.train_seed.to_string()),
        ("molecule", t.ds.molecule.clone()),
        ("target", t.ds.target.to_string()),
        ("unit", t.ds.target.unit().to_string()),
        ("train_indices", t.train.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")),
    ];
    c.metadata.extend(meta.into_iter().map(|(k, v)| (k.to_string(), v)));
    c.save(out.path(name))?;
    Ok(())
}

pub fn train(config: &RunConfig) -> Result<()> {
    let (_, analysis) = load(config)?;
    let out = Out::new(config)?;
    let mut summary = Vec::new();
    for (k, target) in targets(config, &analysis).iter().enumerate() {
        let t = train_one(config, &analysis, target, k)?;
        let s = slug(&target.to_string());
        let test: Vec<usize> = (0..t.ds.len()).filter(|i| !t.train.contains(i)).collect();
        let p1 = predict(&t.siqnn, &t.ds)?;
        let p2 = predict(&t.siqnn_nn, &t.ds)?;
        let rows = (0..t.ds.len()).map(|i| PredictionRow {
            r: t.ds.r[i],
            exact: t.ds.y[i],
            siqnn: p1[i],
            siqnn_nn: p2[i],
            train: u8::from(t.train.contains(&i)),
        });
        out.csv(
            &format!("predictions_{s}.csv"),
            &[&units(target), &format!("target: {target} ({})", target.unit())],
            rows,
        )?;
        for (stage, o) in ["pretrain", "end_to_end"].iter().zip(&t.stages) {
            let mut w = out.writer(&format!("train_log_{s}_{stage}.csv"), &[&units(target)])?;
            write_log(&o.log, &mut w)?;
        }
        save_checkpoint(&out, &t, &t.siqnn, &format!("checkpoint_{s}_siqnn.json"))?;
        save_checkpoint(&out, &t, &t.siqnn_nn, &format!("checkpoint_{s}_siqnn_nn.json"))?;
        for (model, pred, o) in [("siqnn", &p1, &t.stages[0]), ("siqnn_nn", &p2, &t.stages[1])] {
            summary.push(SummaryRow {
                target: target.to_string(),
                model: model.into(),
                train_mse: mse(pred, &t.ds.y, &t.train),
                test_mse: mse(pred, &t.ds.y, &test),
                stop_reason: o.stop.as_str(),
                iterations: o.iterations,
            });
        }
    }
    out.csv("train_summary.csv", &["units: MSE in the squared unit of each target"], &summary)?;
    for r in &summary {
        println!(
            "{:<8} {:<9} train {:.3e}  test {:.3e}  ({})",
            r.target, r.model, r.train_mse, r.test_mse, r.stop_reason
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct TimingRow<'a> {
    model: &'a str,
    target: &'a str,
    l: usize,
    replicate: usize,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct BoxCsvRow {
    model: String,
    target: String,
    l: usize,
    n: usize,
    median: f64,
    q1: f64,
    q3: f64,
    whisker_lo: f64,
    whisker_hi: f64,
    outliers: String,
}

pub fn benchmark(config: &RunConfig) -> Result<()> {
    let (_, analysis) = load(config)?;
    let datasets =
        targets(config, &analysis).iter().map(|t| dataset(config, &analysis, t)).collect::<Result<Vec<_>>>()?;
    if datasets.is_empty() {
        bail!("no targets to benchmark");
    }
    let out = Out::new(config)?;
    let records = run_matrix(&datasets, &config.bench_config());
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let note = "units: test_mse and train_mse in the squared unit of each target (Ha^2 or (e*a0)^2)";
    out.csv("records.csv", &[note], &records)?;
    out.json("records.json", &records)?;
    out.csv(
        "timings.csv",
        &["wall-clock times; not reproducible by design"],
        records.iter().map(|r| TimingRow {
            model: &r.model,
            target: &r.target,
            l: r.l,
            replicate: r.replicate,
            wall_time_s: r.wall_time_s,
        }),
    )?;
    write_aggregates(&out, &records)?;
    println!("{} runs, {failed} failed; results in {}", records.len(), out.dir.display());
    Ok(())
}

fn write_aggregates(out: &Out, records: &[siqnn::bench::RunRecord]) -> Result<()> {
    let boxes = aggregate_boxplot(records)?;
    out.csv(
        "boxplot.csv",
        &["units: test MSE in the squared unit of each target"],
        boxes.iter().map(|b| BoxCsvRow {
            model: b.model.clone(),
            target: b.target.clone(),
            l: b.l,
            n: b.stats.n,
            median: b.stats.median,
            q1: b.stats.q1,
            q3: b.stats.q3,
            whisker_lo: b.stats.whisker_lo,
            whisker_hi: b.stats.whisker_hi,
            outliers: b.stats.outliers.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";"),
        }),
    )?;
    let ranks = aggregate_ranking(records)?;
    out.csv("ranking.csv", &["mean rank over targets and replicates; sem = standard error of the mean"], &ranks)?;
    let mut by_l: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for r in &ranks {
        by_l.entry(r.l).or_default().push(format!("{} {:.2}±{:.2}", r.model, r.mean_rank, r.sem));
    }
    for (l, rows) in by_l {
        println!("L={l}: {}", rows.join(", "));
    }
    Ok(())
}

fn hamiltonians_for(bundle: &IntegralBundle, ds: &Dataset) -> Result<Vec<PauliSum>> {
    let ints = bundle.integrals()?;
    ds.r.iter()
        .map(|&r| {
            let k = bundle
                .geometries
                .iter()
                .position(|g| (g.r - r).abs() < 1e-9)
                .ok_or_else(|| anyhow!("no bundle geometry at R={r}"))?;
            Ok(build_qubit_hamiltonian(&ints[k])?)
        })
        .collect()
}

pub fn shots(config: &RunConfig) -> Result<()> {
    let (bundle, analysis) = load(config)?;
    let (model, ds, train) = match &config.shots.checkpoint {
        Some(path) => {
            let c = Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
            let field = |k: &str| c.metadata.get(k).ok_or_else(|| anyhow!("checkpoint lacks metadata {k:?}"));
            let target: TargetSpec = field("target")?.parse()?;
            let train: Vec<usize> =
                field("train_indices")?.split(';').map(str::parse).collect::<std::result::Result<_, _>>()?;
            let ds = dataset(config, &analysis, &target)?;
            if field("molecule")? != &ds.molecule {
                bail!("checkpoint was trained on {}, bundle holds {}", field("molecule")?, ds.molecule);
            }
            (HybridModel::from_checkpoint(&c)?, ds, train)
        }
        None => {
            let target = targets(config, &analysis).into_iter().next().ok_or_else(|| anyhow!("no target"))?;
            let t = train_one(config, &analysis, &target, 0)?;
            (t.siqnn_nn, t.ds, t.train)
        }
    };
    let hamiltonians = hamiltonians_for(&bundle, &ds)?;
    let study = ShotStudyConfig {
        shots: config.shots.grid.clone(),
        seeds: config.shots.seeds,
        seed: derive_seed(config.seed, &[2]),
        high_shots: config.shots.high_shots,
        train: config.shots.retrain.then_some(config.train.stages),
    };
    let rows = shot_study(&model, &ds, &train, &hamiltonians, &study)?;
    let out = Out::new(config)?;
    out.csv(
        "shots.csv",
        &[&units(&ds.target), "checkpoint: the given model sampled at each shot count; upper_bound and qwc: ground-state energy measurement with the total budget per Pauli term or split over qwc groups"],
        &rows,
    )?;
    for r in &rows {
        println!("{:<18} {:>9} shots  mse {:.3e}", r.curve.to_string(), r.shots, r.mse);
    }
    Ok(())
}

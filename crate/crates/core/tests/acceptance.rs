//! Acceptance gate: one line per criterion on stdout, one test per criterion.

mod common;

use std::io::Write;
use std::sync::OnceLock;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use siqnn::ansatz::{build_observable_basis, build_siqnn, param_count_formula};
use siqnn::baselines::{architecture_for_budget, fit_nn, fit_svr, Gpr, GprHyper, NnGrid, Regressor, SvrGrid};
use siqnn::bench::{
    aggregate_ranking, equal_indices, run_matrix, shot_study, BenchConfig, Curve, RunRecord, ShotStudyConfig, Strategy,
};
use siqnn::model::{Head, HybridModel};
use siqnn::operators::{build_qubit_hamiltonian, qwc_group, to_dense, PauliSum};
use siqnn::rng::{derive_seed, rng_from};
use siqnn::simulator::{apply_n_gate, apply_p_gate, gradient_diagonal, StateVector};
use siqnn::spectra::{
    analyze_bundle, build_dataset, diagonalize, AnalysisOptions, Dataset, ScanAnalysis, Sector, TargetSpec,
    TrackOptions,
};
use siqnn::training::{model_loss, train_two_stage, StopPolicy, TrainConfig, TrainSet};

use rand::Rng;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "acceptance {n:>2} {verdict} {name}: {detail}").unwrap();
}

fn lih() -> &'static ScanAnalysis {
    static CELL: OnceLock<ScanAnalysis> = OnceLock::new();
    CELL.get_or_init(|| analyze_bundle(&fixture("lih"), AnalysisOptions::default(), TrackOptions::default()).unwrap())
}

fn lih_t2() -> &'static Dataset {
    static CELL: OnceLock<Dataset> = OnceLock::new();
    CELL.get_or_init(|| build_dataset(lih(), &TargetSpec::energy("T2"), None, TrackOptions::default()).unwrap())
}

/// LiH ΔE(T2), L = 4, ten BO replicates, all models.
fn t2_records() -> &'static Vec<RunRecord> {
    static CELL: OnceLock<Vec<RunRecord>> = OnceLock::new();
    CELL.get_or_init(|| {
        let config =
            BenchConfig { ls: vec![4], replicates: 10, strategy: Strategy::Bo, seed: 2024, ..Default::default() };
        run_matrix(std::slice::from_ref(lih_t2()), &config)
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn test_mses(records: &[RunRecord], model: &str) -> Vec<f64> {
    records.iter().filter(|r| r.model == model).map(|r| r.test_mse.expect("run succeeded")).collect()
}

#[test]
fn criterion_01_parameter_counts() {
    let count = |n| build_siqnn(n).unwrap().param_count;
    let got = [count(4), count(2), count(8), count(5)];
    let formula = [param_count_formula(4).unwrap(), param_count_formula(2).unwrap(), param_count_formula(8).unwrap()];
    let pass = got == [21, 5, 53, 35] && formula == [21, 5, 53];
    report(1, "parameter counts", pass, &format!("n_orb 4/2/8/5 → {got:?}, formula {formula:?}"));
    assert!(pass);
}

#[test]
fn criterion_02_jordan_wigner_oracle() {
    let mut rng = rng_from(2);
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for _ in 0..3 {
            let ints = random_integrals(n, n, &mut rng);
            let qubit = to_dense(&build_qubit_hamiltonian(&ints).unwrap()).unwrap();
            let fermion = fermionic_hamiltonian(&ints).map(|v| C::new(v, 0.0));
            worst = worst.max(max_abs_diff(&qubit, &fermion));
        }
    }
    let pass = worst < 1e-10;
    report(2, "Jordan-Wigner vs occupation-number oracle", pass, &format!("max deviation {worst:.2e} (< 1e-10)"));
    assert!(pass);
}

#[test]
fn criterion_03_simulator_oracle() {
    let mut rng = rng_from(3);
    let mut gate_dev = 0.0f64;
    for n in 2..=6 {
        for _ in 0..5 {
            let q1 = rng.random_range(0..n);
            let q2 = (q1 + rng.random_range(1..n)) % n;
            let psi = random_state(n, &mut rng);
            let v = DMatrix::from_column_slice(1 << n, 1, psi.amplitudes());
            let tn = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let tp = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let mut a = psi.clone();
            apply_n_gate(&mut a, q1, q2, tn).unwrap();
            let want = n_gate_dense(n, q1, q2, tn) * &v;
            gate_dev = gate_dev.max(max_abs_diff(&DMatrix::from_column_slice(1 << n, 1, a.amplitudes()), &want));
            let mut b = psi.clone();
            apply_p_gate(&mut b, q1, q2, tp).unwrap();
            let want = p_gate_dense(n, q1, q2, tp) * &v;
            gate_dev = gate_dev.max(max_abs_diff(&DMatrix::from_column_slice(1 << n, 1, b.amplitudes()), &want));
        }
    }
    let template = build_siqnn(4).unwrap();
    let circuit = template.compile().unwrap();
    let basis = build_observable_basis(&template).unwrap();
    let mut grad_err = 0.0f64;
    for _ in 0..20 {
        let theta: Vec<f64> = (0..template.param_count).map(|_| rng.random_range(-3.0..3.0)).collect();
        let w: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag = basis.weighted_diagonal(&w);
        let psi = random_state(8, &mut rng);
        let g = gradient_diagonal(&circuit, &theta, &psi, &diag).unwrap().gradient;
        let f = |t: &[f64]| gradient_diagonal(&circuit, t, &psi, &diag).unwrap().value;
        let h = 1e-5;
        let fd: Vec<f64> = (0..theta.len())
            .map(|k| {
                let (mut p, mut m) = (theta.clone(), theta.clone());
                p[k] += h;
                m[k] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect();
        let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
        grad_err = grad_err.max(num / den);
    }
    let pass = gate_dev < 1e-10 && grad_err < 1e-5;
    report(
        3,
        "simulator oracle",
        pass,
        &format!("gate deviation {gate_dev:.2e} (< 1e-10), gradient relative error {grad_err:.2e} (< 1e-5)"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_sector_diagonalization() {
    let bundle = fixture("h2");
    let mut eig_dev = 0.0f64;
    let mut residual = 0.0f64;
    let mut reference_dev = 0.0f64;
    for (g, ints) in bundle.geometries.iter().zip(bundle.integrals().unwrap()) {
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let sector = diagonalize(&h, Sector::new(ints.n_elec, 0)).unwrap();
        let full = to_dense(&h).unwrap().symmetric_eigen().eigenvalues;
        for (j, &e) in sector.energies.iter().enumerate() {
            let nearest = full.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min);
            eig_dev = eig_dev.max(nearest);
            residual = residual.max(sector.residual(&h, j));
        }
        if let Some(r) = g.reference_energy {
            reference_dev = reference_dev.max((sector.energies[0] - r).abs());
        }
    }
    let pass = eig_dev < 1e-8 && residual < 1e-8;
    report(
        4,
        "sector diagonalization on H2",
        pass,
        &format!("eigenvalue deviation {eig_dev:.2e}, residual {residual:.2e} (< 1e-8); reference ground energy deviation {reference_dev:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_shot_estimator() {
    let mut rng = rng_from(5);
    let template = build_siqnn(5).unwrap();
    let theta = (0..template.param_count).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = build_observable_basis(&template).unwrap().len();
    let w = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let model = HybridModel::new(template, theta, Head::Direct { w }).unwrap();
    let psi: StateVector = lih_t2().states[40].clone();
    let exact = model.forward(&psi, 0.0).unwrap();
    let seeds = 1000u64;
    let stats = |shots: u64| {
        let v: Vec<f64> =
            (0..seeds).map(|s| model.forward_shots(&psi, 0.0, shots, derive_seed(shots, &[s])).unwrap()).collect();
        let mean = v.iter().sum::<f64>() / seeds as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        (mean, var)
    };
    let shots = [1_000u64, 10_000, 100_000];
    let results: Vec<(f64, f64)> = shots.iter().map(|&n| stats(n)).collect();
    let z_max = results.iter().map(|(m, v)| (m - exact).abs() / (v / seeds as f64).sqrt()).fold(0.0, f64::max);
    let xs: Vec<f64> = shots.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let pass = z_max < 3.0 && (slope + 1.0).abs() < 0.1;
    report(5, "shot estimator", pass, &format!("max |bias|/σ {z_max:.2} (< 3), variance slope {slope:.3} (−1 ± 0.1)"));
    assert!(pass);
}

#[test]
fn criterion_06_qwc_grouping() {
    let ints = fixture("lih").integrals().unwrap();
    let mut max_groups = 0;
    let mut all_ok = true;
    let mut n_terms = Vec::new();
    for g in &ints {
        let h = build_qubit_hamiltonian(g).unwrap();
        let groups = qwc_group(&h);
        all_ok &= groups.iter().all(|grp| grp.is_pairwise_qwc());
        let mut rebuilt = PauliSum::zero(h.n_qubits());
        for grp in &groups {
            for (p, c) in &grp.terms {
                rebuilt.add_term(*p, *c);
            }
        }
        all_ok &= rebuilt.len() == h.len() && groups.iter().map(|g| g.terms.len()).sum::<usize>() == h.len();
        max_groups = max_groups.max(groups.len());
        n_terms.push(h.len());
    }
    let max_terms = n_terms.iter().copied().max().unwrap();
    let pass = all_ok && max_groups <= 70;
    report(
        6,
        "qwc grouping on LiH",
        pass,
        &format!("{max_terms} Pauli strings, at most {max_groups} groups (≤ 70), all pairwise qwc: {all_ok}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_training_smoke() {
    let analysis = analyze_bundle(&fixture("h2"), AnalysisOptions::default(), TrackOptions::default()).unwrap();
    let ds = build_dataset(&analysis, &TargetSpec::energy("T1"), None, TrackOptions::default()).unwrap();
    let idx = equal_indices(ds.len(), 6);
    let (r, y) = (ds.r_scaled(), ds.y_scaled());
    let data = TrainSet::new(
        idx.iter().map(|&k| ds.states[k].clone()).collect(),
        idx.iter().map(|&k| r[k]).collect(),
        idx.iter().map(|&k| y[k]).collect(),
    )
    .unwrap();
    let template = build_siqnn(4).unwrap();
    let factor = ds.scaling.mse_factor();
    let losses: Vec<f64> = (0..5)
        .map(|seed| {
            let run = train_two_stage(&template, &data, &TrainConfig::default(), factor, seed).unwrap();
            model_loss(&run.siqnn_nn, &data).unwrap() * factor
        })
        .collect();
    let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = best <= 1e-5;
    let shown: Vec<String> = losses.iter().map(|l| format!("{l:.1e}")).collect();
    report(
        7,
        "H2 ΔE(T1) training smoke",
        pass,
        &format!("train loss per seed [{}] Ha², best {best:.1e} (≤ 1e-5)", shown.join(", ")),
    );
    assert!(pass);
}

#[test]
fn criterion_08_lih_t2_median_gap() {
    let records = t2_records();
    assert!(records.iter().all(|r| r.error.is_none()), "failed runs: {records:?}");
    let ours = median(test_mses(records, "siqnn_nn"));
    let mut ratios = Vec::new();
    for m in ["nn", "gpr", "svr"] {
        ratios.push((m, median(test_mses(records, m)) / ours));
    }
    let min_ratio = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let pass = min_ratio >= 10.0;
    let shown: Vec<String> = ratios.iter().map(|(m, r)| format!("{m} {r:.1}×")).collect();
    report(
        8,
        "LiH ΔE(T2), L=4, 10 BO replicates",
        pass,
        &format!("median siqnn_nn test MSE {ours:.2e} Ha², baseline medians over ours: {} (≥ 10×)", shown.join(", ")),
    );
    assert!(pass);
}

#[test]
fn criterion_09_lih_ranking() {
    let targets = lih().default_targets(4, 1e-3);
    let datasets: Vec<Dataset> =
        targets.iter().map(|t| build_dataset(lih(), t, None, TrackOptions::default()).unwrap()).collect();
    let config =
        BenchConfig { ls: vec![6, 7, 8], replicates: 10, strategy: Strategy::Bo, seed: 2025, ..Default::default() };
    let records = run_matrix(&datasets, &config);
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    let table = aggregate_ranking(&records).unwrap();
    let mut pass = failures == 0;
    let mut lines = Vec::new();
    for l in [6, 7, 8] {
        let rows: Vec<_> = table.iter().filter(|r| r.l == l).collect();
        let best = rows.iter().min_by(|a, b| a.mean_rank.total_cmp(&b.mean_rank)).unwrap();
        let ours = rows.iter().find(|r| r.model == "siqnn_nn").unwrap();
        pass &= best.model == "siqnn_nn";
        lines.push(format!(
            "L={l}: siqnn_nn {:.2}±{:.2}, best {} {:.2}",
            ours.mean_rank, ours.sem, best.model, best.mean_rank
        ));
    }
    report(
        9,
        "LiH mean rank",
        pass,
        &format!("{} targets; {}; failed runs {failures}", targets.len(), lines.join("; ")),
    );
    assert!(pass);
}

#[test]
fn criterion_10_shot_study() {
    let records = t2_records();
    let best = records
        .iter()
        .filter(|r| r.model == "siqnn_nn")
        .min_by(|a, b| a.test_mse.unwrap().total_cmp(&b.test_mse.unwrap()))
        .unwrap();
    let ds = lih_t2();
    let idx = best.indices();
    let (r, y) = (ds.r_scaled(), ds.y_scaled());
    let data = TrainSet::new(
        idx.iter().map(|&k| ds.states[k].clone()).collect(),
        idx.iter().map(|&k| r[k]).collect(),
        idx.iter().map(|&k| y[k]).collect(),
    )
    .unwrap();
    let template = build_siqnn(5).unwrap();
    let run = train_two_stage(&template, &data, &TrainConfig::default(), ds.scaling.mse_factor(), best.seed).unwrap();
    let hamiltonians: Vec<PauliSum> =
        fixture("lih").integrals().unwrap().iter().map(|i| build_qubit_hamiltonian(i).unwrap()).collect();
    let config = ShotStudyConfig {
        shots: vec![1_000, 3_000, 10_000, 30_000, 100_000, 300_000, 1_000_000],
        seeds: 10,
        seed: 10,
        ..Default::default()
    };
    let rows = shot_study(&run.siqnn_nn, ds, &idx, &hamiltonians, &config).unwrap();
    let at = |curve: Curve, n: u64| rows.iter().find(|r| r.curve == curve && r.shots == n).unwrap().mse;
    let gap = at(Curve::Qwc, 30_000) / at(Curve::Checkpoint, 30_000);
    let ordered = config.shots.iter().all(|&n| at(Curve::Qwc, n) >= at(Curve::UpperBound, n));
    let pass = gap >= 10.0 && ordered;
    report(
        10,
        "shot study on the ΔE(T2) checkpoint",
        pass,
        &format!(
            "at 3e4 shots: siqnn_nn {:.2e}, upper bound {:.2e}, qwc {:.2e} Ha² (gap {gap:.0}× ≥ 10×); qwc ≥ upper bound everywhere: {ordered}",
            at(Curve::Checkpoint, 30_000),
            at(Curve::UpperBound, 30_000),
            at(Curve::Qwc, 30_000)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_baseline_sanity() {
    let x: Vec<f64> = (0..10).map(|k| -1.0 + 2.0 * k as f64 / 9.0).collect();
    let sine: Vec<f64> = x.iter().map(|v| (3.0 * v).sin()).collect();
    let gp = Gpr::fit(&x, &sine, GprHyper { length_scale: 0.5, noise: 0.0, signal: 1.0 }).unwrap();
    let gp_err = x.iter().zip(&sine).map(|(a, b)| (gp.predict(*a) - b).abs()).fold(0.0, f64::max);

    let svr = fit_svr(&x, &sine, &SvrGrid::default()).unwrap();
    let kkt = svr.kkt_residual(&sine);

    let linear: Vec<f64> = x.iter().map(|v| 0.7 * v - 0.2).collect();
    let grid = NnGrid {
        policy: StopPolicy { target_loss: 1e-12, patience: usize::MAX, max_iters: 100_000, ..StopPolicy::default() },
        ..NnGrid::default()
    };
    let widths = architecture_for_budget(10).unwrap();
    let nn = fit_nn(&x, &linear, &widths, &grid, 1.0, 11).unwrap();
    let nn_mse = nn.mse(&x, &linear);

    let pass = gp_err < 1e-8 && kkt < 1e-6 && nn_mse < 1e-8;
    report(
        11,
        "baseline sanity",
        pass,
        &format!("GPR interpolation {gp_err:.1e} (< 1e-8), SVR KKT residual {kkt:.1e} (< 1e-6), NN linear-fit MSE {nn_mse:.1e} (< 1e-8)"),
    );
    assert!(pass);
}

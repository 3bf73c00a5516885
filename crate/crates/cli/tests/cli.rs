use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siqnn"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    if !out.status.success() {
        eprintln!(
            "stdout:\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A three-geometry H2 bundle, edited by `f`.
fn small_bundle(dir: &Path, f: impl FnOnce(&mut Value)) -> PathBuf {
    let text = std::fs::read_to_string(repo("fixtures/h2.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["geometries"].as_array_mut().unwrap().truncate(3);
    f(&mut v);
    let p = dir.join("bundle.json");
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn validate_accepts_fixture() {
    let out = run(&["validate", s(&repo("fixtures/h2.json"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: H2 with 100 geometries"));
}

#[test]
fn validate_names_asymmetric_h1() {
    let dir = tempfile::tempdir().unwrap();
    let p = small_bundle(dir.path(), |v| {
        let h1 = &mut v["geometries"][1]["h1"][1];
        *h1 = Value::from(h1.as_f64().unwrap() + 0.1);
    });
    let out = run(&["validate", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("geometry 1") && text.contains("h1"), "{text}");
}

#[test]
fn validate_names_missing_dipole_block() {
    let dir = tempfile::tempdir().unwrap();
    let p = small_bundle(dir.path(), |v| {
        v["geometries"][0].as_object_mut().unwrap().remove("dipole1");
    });
    let out = run(&["validate", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("missing dipole block"));
}

#[test]
fn missing_bundle_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["build-dataset", "--bundle", "/nonexistent/bundle.json", "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("does not exist"), "{err}");
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[bench]\nreplicates = 7\n").unwrap();
    let out = run(&["config", "-c", s(&cfg), "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("seed = 9") && text.contains("replicates = 7"), "{text}");
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = repo("fixtures/h2.json");
    for name in ["a", "b"] {
        let o = dir.path().join(name);
        let out = run(&["build-dataset", "--bundle", s(&bundle), "--target", "dE:T1", "-o", s(&o), "--seed", "3"]);
        assert!(out.status.success());
        let out = run(&[
            "train",
            "--bundle",
            s(&bundle),
            "--target",
            "dE:T1",
            "-o",
            s(&o),
            "--seed",
            "3",
            "--pretrain-iters",
            "40",
            "--end-to-end-iters",
            "40",
        ]);
        assert!(out.status.success());
        let out = run(&[
            "benchmark",
            "--bundle",
            s(&bundle),
            "--target",
            "dE:T1",
            "-o",
            s(&o.join("bench")),
            "--seed",
            "3",
            "--ls",
            "4",
            "--replicates",
            "2",
            "--models",
            "siqnn,nn,gpr,svr",
            "--pretrain-iters",
            "40",
        ]);
        assert!(out.status.success());
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for sub in ["", "bench"] {
        let fa = csv_files(&a.join(sub));
        assert!(fa.len() >= 3);
        for f in fa {
            if f.file_name().unwrap() == "timings.csv" {
                continue;
            }
            let g = b.join(sub).join(f.file_name().unwrap());
            assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(&g).unwrap(), "{} differs", f.display());
        }
    }
    let head = std::fs::read_to_string(a.join("bench/records.csv")).unwrap();
    assert!(head.lines().nth(1).unwrap().starts_with("# config_hash: "));
    assert!(head.lines().nth(2).unwrap() == "# seed: 3");
}

#[test]
fn h2_end_to_end_smoke() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bundle = repo("fixtures/h2.json");
    let o = dir.path();
    assert!(run(&["build-dataset", "--bundle", s(&bundle), "-o", s(&o.join("data"))]).status.success());
    assert!(run(&["train", "--bundle", s(&bundle), "--target", "dE:T1", "-o", s(&o.join("train"))]).status.success());
    let checkpoint = o.join("train/checkpoint_dE_T1_siqnn_nn.json");
    let out = run(&[
        "shot-study",
        "--bundle",
        s(&bundle),
        "--checkpoint",
        s(&checkpoint),
        "--shots",
        "1000,10000",
        "-o",
        s(&o.join("shots")),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "plot",
        "--predictions",
        s(&o.join("train/predictions_dE_T1.csv")),
        "--shots",
        s(&o.join("shots/shots.csv")),
        "-o",
        s(&o.join("fig")),
    ]);
    assert!(out.status.success());
    assert!(o.join("fig/curve_dE_T1.svg").exists() && o.join("fig/shots.svg").exists());

    let summary = std::fs::read_to_string(o.join("train/train_summary.csv")).unwrap();
    let row = summary.lines().find(|l| l.starts_with("dE:T1,siqnn_nn,")).unwrap();
    let train_mse: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(train_mse <= 1e-4, "{row}");
    assert!(start.elapsed().as_secs() < 600);
}

#[test]
fn plot_without_inputs_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["plot", "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["plot", "--records", s(&data("data/records.csv")), "-o", s(dir.path())]);
    assert!(out.status.success());
    let names = ["ranking.svg", "boxplot_dE_T1.svg", "boxplot_tdm_S1.svg"];
    for name in names {
        let got = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let golden = data("golden").join(name);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&golden, &got).unwrap();
        }
        let want = std::fs::read_to_string(&golden).unwrap();
        assert!(got == want, "{name} differs from the golden file; rerun with UPDATE_GOLDEN=1 after checking it");
    }
}

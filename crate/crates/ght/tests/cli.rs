use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use ght::commands::paths::membership_rows;
use ght::dto::{GhtBundle, PathDto};
use ght::{run, Command, HarnessError, RunOptions};
use ght_core::causal::{path_membership, BaseSet, PathClassSpec, PathWindow, TimeGrid};

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn opts(config: PathBuf, out: PathBuf) -> RunOptions {
    RunOptions { config, out: Some(out), seed: None, strict: false, threads: Some(1) }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

fn bin(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_ght")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

const DIRACS: &str = r#"{
  "params": {
    "pairs": [
      { "name": "files", "a": { "kind": "file", "path": "a.json" }, "b": { "kind": "file", "path": "b.json" } }
    ]
  }
}"#;

#[test]
fn dirac_files_are_at_their_gap() {
    let dir = tempfile::tempdir().unwrap();
    for (a, b) in [(0.25f64, 1.0f64), (-3.0, 4.5), (2.0, 2.0)] {
        write(dir.path(), "a.json", &format!(r#"{{"kind": "discrete", "dim": 1, "atoms": [[{a}]], "weights": [1.0]}}"#));
        write(dir.path(), "b.json", &format!(r#"{{"kind": "discrete", "dim": 1, "atoms": [[{b}]], "weights": [1.0]}}"#));
        let cfg = write(dir.path(), "metric.json", DIRACS);
        let out = dir.path().join("out");
        run(Command::Metric, &opts(cfg, out.clone())).unwrap();
        let w: f64 = column(&out.join("distances.csv"), "wasserstein")[0].parse().unwrap();
        assert_eq!(w, (a - b).abs());
    }
}

#[test]
fn reruns_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (command, file, name) in [
        (Command::Metric, "metric.json", "distances.csv"),
        (Command::Complexity, "complexity.json", "complexity.csv"),
        (Command::StaticFit, "static_fit.json", "error_curve.csv"),
    ] {
        let one = dir.path().join(format!("{file}-1"));
        let two = dir.path().join(format!("{file}-2"));
        run(command, &opts(root.join(file), one.clone())).unwrap();
        run(command, &opts(root.join(file), two.clone())).unwrap();
        assert_eq!(fs::read(one.join(name)).unwrap(), fs::read(two.join(name)).unwrap(), "{file}");
    }
}

#[test]
fn one_step_paths_have_equal_adapted_and_plain_distances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"params": {"p": 2.0, "pairs": [{"name": "t1",
            "a": {"kind": "paths", "step_dim": 2, "horizon": 1, "paths": [[0.0, 1.0], [1.0, -2.0], [0.5, 0.5]], "weights": [0.2, 0.3, 0.5]},
            "b": {"kind": "paths", "step_dim": 2, "horizon": 1, "paths": [[1.5, 0.0], [-1.0, 1.0]], "weights": [0.6, 0.4]}}]}}"#,
    );
    let out = dir.path().join("out");
    run(Command::Metric, &opts(cfg, out.clone())).unwrap();
    let f = out.join("distances.csv");
    let w: f64 = column(&f, "wasserstein")[0].parse().unwrap();
    let aw: f64 = column(&f, "adapted_wasserstein")[0].parse().unwrap();
    assert!((w - aw).abs() < 1e-9, "{w} vs {aw}");
}

#[test]
fn unknown_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"params": {"pairs": []}, "sead": 3}"#);
    let (code, err) = bin(&["metric", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("sead"), "{err}");

    let broken = write(dir.path(), "broken.json", r#"{"params": "#);
    let (code, err) = bin(&["metric", "--config", broken.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("malformed JSON"), "{err}");
}

#[test]
fn strict_mode_needs_the_absolute_constant() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/complexity.json");
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(root.clone(), dir.path().join("strict"));
    o.strict = true;
    let err = run(Command::Complexity, &o).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert!(err.to_string().contains("absolute constant c"), "{err}");
    let (code, msg) =
        bin(&["complexity", "--strict", "--config", root.to_str().unwrap(), "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(msg.contains("absolute constant c"));

    let m = run(Command::Complexity, &opts(root, dir.path().join("loose"))).unwrap();
    assert_eq!(m.permissive_defaults, vec!["absolute constant c = 1".to_string()]);
}

#[test]
fn complexity_sweep_columns() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/complexity.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    run(Command::Complexity, &opts(root, out.clone())).unwrap();
    let rows = csv_rows(&out.join("complexity.csv"));
    let mut last = f64::NEG_INFINITY;
    for r in rows.iter().filter(|r| r[1] == "classical") {
        let ln: f64 = r[7].parse().unwrap();
        assert!(ln >= last);
        last = ln;
        let codes: u128 = r[6].parse().unwrap();
        let depth: u128 = r[3].parse().unwrap();
        let params: u128 = r[5].parse().unwrap();
        // n = 2 in the shipped config.
        assert_eq!(params, (codes + 2 + 1).pow(2) * (depth + 1));
    }
    assert!(last > f64::NEG_INFINITY);
}

#[test]
fn frozen_sde_stays_in_its_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"seed": 5, "params": {"sde": {"a": [0.0], "b": [0.0], "diffusion": [0.0], "noise_dim": 1},
            "initial": {"kind": "fixed", "x": [0.3]}, "step": 0.5, "horizon": 8, "n_paths": 25, "eps": 0.1}}"#,
    );
    let out = dir.path().join("out");
    run(Command::Paths, &opts(cfg, out.clone())).unwrap();
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["containment_frequency"], 1.0);
}

#[test]
fn membership_rows_follow_the_library() {
    let grid = TimeGrid::uniform(-2, 3, 0.5).unwrap();
    let paths: Vec<PathWindow> = (0..6)
        .map(|i| {
            let vals: Vec<Vec<f64>> = (0..grid.len()).map(|k| vec![0.3 * i as f64 - 0.2 * k as f64]).collect();
            PathWindow::new(grid.clone(), &vals).unwrap()
        })
        .collect();
    let class = PathClassSpec::KZ { set: BaseSet::Box { lo: vec![-1.0], hi: vec![1.0] } };
    let rows = membership_rows(std::slice::from_ref(&class), &paths).unwrap();
    assert_eq!(rows.len(), paths.len());
    for (row, p) in rows.iter().zip(&paths) {
        let m = path_membership(&class, p).unwrap();
        assert_eq!(row[2], m.member.to_string());
        assert_eq!(row[3], m.worst.as_ref().map(|w| w.index.to_string()).unwrap_or_default());
    }
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"params": {"sde": {"a": [0.0], "b": [0.0], "diffusion": [1.0], "noise_dim": 1},
            "initial": {"kind": "fixed", "x": [0.0]}, "step": 0.5, "horizon": 4, "n_paths": 3, "eps": 0.1}}"#,
    );
    let (code, err) = bin(&["paths", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
    let (code, _) =
        bin(&["paths", "--seed", "4", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn path_offsets_must_match_the_grid() {
    let good = PathDto { times: vec![-1.0, 0.0, 1.0], values: vec![vec![0.0], vec![1.0], vec![2.0]], offset: -1 };
    let p = good.build().unwrap();
    assert_eq!(p.at(1).unwrap(), &[2.0]);
    assert_eq!(PathDto::from_path(&p), good);
    let bad = PathDto { offset: 0, ..good };
    assert!(matches!(bad.build(), Err(HarnessError::Config(_))));
}

#[test]
fn saved_models_evaluate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.json",
        r#"{"seed": 3, "params": {
            "target": {"drift": {"kind": "sin_time_plus_state", "scale": 0.1}, "sigma": 0.2, "atoms": 4},
            "n_t": 1, "eps": 0.8,
            "grid": {"lo": -3, "hi": 3, "step": 1.0},
            "paths": {"count": 9, "lo": -1.0, "hi": 1.0},
            "fit": {"encoder_hidden": [4], "encoder_train": {"epochs": 200}, "decoder_budget": {"n": 8, "q": 4}}}}"#,
    );
    let out = dir.path().join("out");
    run(Command::DynamicFit, &opts(cfg, out.clone())).unwrap();
    let bundle: GhtBundle = serde_json::from_slice(&fs::read(out.join("model.json")).unwrap()).unwrap();
    let ght = bundle.build().unwrap();
    let again: GhtBundle = serde_json::from_str(&serde_json::to_string(&GhtBundle::from_model(&ght)).unwrap()).unwrap();
    let copy = again.build().unwrap();
    let grid = TimeGrid::uniform(-3, 3, 1.0).unwrap();
    let vals: Vec<Vec<f64>> = (0..grid.len()).map(|k| vec![(k as f64 * 0.7).sin()]).collect();
    let path = PathWindow::new(grid, &vals).unwrap();
    for n in -3..=3 {
        let a = ght_core::hyper::ght_eval(&ght, &path, n).unwrap();
        let b = ght_core::hyper::ght_eval(&copy, &path, n).unwrap();
        assert_eq!(a, b);
    }
}

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_delstab"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A jittered 9x9 grid written to `dir/pts.txt`.
fn generic_points(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("pts.txt");
    let (code, _, err) = run(&[
        "gen",
        "delta-search",
        "--dims",
        "9,9",
        "--jitter",
        "0.15",
        "--k",
        "4",
        "--seed",
        "3",
        "--out",
        path(&p),
    ]);
    assert_eq!(code, 0, "{err}");
    p
}

#[test]
fn gen_is_deterministic() {
    let (c1, a, _) = run(&[
        "gen", "grid", "--dims", "4,3", "--jitter", "0.2", "--seed", "5",
    ]);
    let (c2, b, _) = run(&[
        "gen", "grid", "--dims", "4,3", "--jitter", "0.2", "--seed", "5",
    ]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 12);
    let (_, c, _) = run(&[
        "gen", "grid", "--dims", "4,3", "--jitter", "0.2", "--seed", "6",
    ]);
    assert_ne!(a, c);
}

#[test]
fn analyze_reports_a_generic_set() {
    let dir = TempDir::new().unwrap();
    let pts = generic_points(&dir);
    let (code, out, err) = run(&["analyze", "--in", path(&pts)]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["command"], "analyze");
    assert_eq!(v["dataset_digest"].as_str().unwrap().len(), 64);
    assert!(v["outputs"]["delaunay"]["generic"].as_bool().unwrap());
    let (code, csv, _) = run(&["analyze", "--in", path(&pts), "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(csv.lines().count() > 1);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.txt");
    assert_eq!(run(&["analyze", "--in", path(&missing)]).0, 2);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0\n1 0\n1\n").unwrap();
    assert_eq!(run(&["analyze", "--in", path(&bad)]).0, 3);

    let square = dir.path().join("grid.txt");
    assert_eq!(
        run(&["gen", "grid", "--dims", "9,9", "--out", path(&square)]).0,
        0
    );
    let (code, out, _) = run(&["analyze", "--in", path(&square)]);
    assert_eq!(code, 4);
    assert_ne!(json(&out)["status"], "ok");

    assert_eq!(run(&["analyze", "--bogus"]).0, 4);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(
        run(&[
            "budget",
            "--upsilon0",
            "2",
            "--mu0",
            "0.5",
            "--delta",
            "0.1",
            "--eps",
            "1",
            "--nu-tilde",
            "0.5"
        ])
        .0,
        4
    );
}

#[test]
fn budget_from_explicit_parameters() {
    let (code, out, _) = run(&[
        "budget",
        "--upsilon0",
        "0.5",
        "--mu0",
        "0.5",
        "--delta",
        "0.1",
        "--eps",
        "1",
        "--nu-tilde",
        "0.5",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    let rho = v["outputs"]["budget"]["rho_point"].as_f64().unwrap();
    assert!((rho - 0.025 / 18.0).abs() < 1e-17);
}

#[test]
fn compare_detects_flips_and_accepts_relabelling() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let k = write("k.json", "[[0,1,2],[0,2,3]]");
    let same = write("same.json", "{\"complex\": [[0,1,2],[0,2,3]]}");
    let flip = write("flip.json", "[[0,1,3],[1,2,3]]");
    let permuted = write("perm.json", "[[3,2,1],[3,1,0]]");
    let mapping = write("map.json", "[3,2,1,0]");

    assert_eq!(run(&["compare", "--k", path(&k), "--k2", path(&same)]).0, 0);
    let (code, out, _) = run(&["compare", "--k", path(&k), "--k2", path(&flip)]);
    assert_eq!(code, 5);
    let v = json(&out);
    let triangles = &v["outputs"]["by_dim"][2];
    assert_eq!(triangles["missing"], 2);
    assert_eq!(triangles["extra"], 2);
    assert_eq!(v["outputs"]["by_dim"][1]["missing"], 1);
    assert_eq!(
        run(&[
            "compare",
            "--k",
            path(&k),
            "--k2",
            path(&permuted),
            "--mapping",
            path(&mapping)
        ])
        .0,
        0
    );
    assert_eq!(
        run(&["compare", "--k", path(&k), "--k2", path(&permuted)]).0,
        5
    );
}

#[test]
fn stability_runs_and_detects_injected_faults() {
    let dir = TempDir::new().unwrap();
    let pts = generic_points(&dir);
    let jsonl = dir.path().join("trials.jsonl");
    let (code, out, err) = run(&[
        "stability",
        "--in",
        path(&pts),
        "--budget-fraction",
        "0.0,1.0",
        "--seeds-count",
        "2",
        "--models",
        "uniform,radial,adversarial,metric,relaxation",
        "--jsonl",
        path(&jsonl),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["status"], "ok");
    let lines: Vec<Value> = std::fs::read_to_string(&jsonl)
        .unwrap()
        .lines()
        .map(json)
        .collect();
    assert_eq!(lines.len(), 4 * 2 * 2 + 2);
    assert!(lines.iter().all(|l| l["passed"] == true));
    assert!(lines
        .iter()
        .filter(|l| l["budget_fraction"] == 0.0)
        .all(|l| l["budget_used"] == 0.0));

    let (code, _, _) = run(&["metric", "--in", path(&pts), "--inject-fault"]);
    assert_eq!(code, 5);
    let (code, _, _) = run(&[
        "stability",
        "--in",
        path(&pts),
        "--models",
        "metric",
        "--seeds-count",
        "1",
        "--inject-fault",
    ]);
    assert_eq!(code, 5);
}

#[test]
fn batch_files_are_validated() {
    let dir = TempDir::new().unwrap();
    generic_points(&dir);
    let good = dir.path().join("batch.json");
    std::fs::write(&good, r#"{"dataset": "pts.txt", "P_J": "auto", "budgets": [0.5], "seeds": 2, "models": ["uniform", "relaxation"]}"#).unwrap();
    let (code, out, err) = run(&["stability", "--batch", path(&good)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["status"], "ok");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dataset": "pts.txt", "P_J": "auto", "budgets": [0.5], "seeds": 2, "models": ["uniform"], "extra": 1}"#).unwrap();
    assert_eq!(run(&["stability", "--batch", path(&bad)]).0, 3);
}

#[test]
fn relax_and_metric_pass_within_budget() {
    let dir = TempDir::new().unwrap();
    let pts = generic_points(&dir);
    let (code, out, err) = run(&["relax", "--in", path(&pts)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["status"], "ok");
    let (code, _, err) = run(&["metric", "--in", path(&pts), "--budget-fraction", "1.0"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&["metric", "--in", path(&pts), "--generic-budget"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn repeated_runs_match_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let pts = generic_points(&dir);
    for args in [
        vec!["analyze", "--in", path(&pts)],
        vec![
            "stability",
            "--in",
            path(&pts),
            "--seeds-count",
            "2",
            "--models",
            "uniform,metric",
        ],
        vec!["budget", "--in", path(&pts)],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.0, b.0);
        assert_eq!(without_timings(json(&a.1)), without_timings(json(&b.1)));
    }
}

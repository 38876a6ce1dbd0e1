use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_priming");

fn priming(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let out = priming(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sim1_matches_golden_and_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_ok(&["sim1", "--out", path_str(&a)]);
    run_ok(&["sim1", "--out", path_str(&b), "--threads", "2"]);
    let a = fs::read_to_string(a).unwrap();
    assert_eq!(a, fs::read_to_string(b).unwrap());
    assert_eq!(a, include_str!("golden/sim1_default.csv"));

    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let effect: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(effect > 0.0, "{row}");
    }
}

#[test]
fn sim2_is_repeatable_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("decay.svg");
    let report = run_ok(&["sim2", "--reps", "12", "--threads", "1", "--out", path_str(&a), "--svg", path_str(&svg)]);
    run_ok(&["sim2", "--reps", "12", "--threads", "3", "--out", path_str(&b)]);
    let a = fs::read_to_string(a).unwrap();
    assert_eq!(a, fs::read_to_string(b).unwrap());

    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "prime_structure,overlap,n_batches,effect,std_error,replications");
    assert_eq!(lines.len(), 13);
    assert!(lines[1].starts_with("DO,Same,0,"));
    assert!(lines[1].ends_with(",0.000000,12"));

    let chart = fs::read_to_string(svg).unwrap();
    assert!(chart.starts_with("<svg") && chart.contains("<polyline"));
    assert_eq!(report["config"]["replications"], 12);
    assert_eq!(report["records"]["sim2"].as_array().unwrap().len(), 12);
}

#[test]
fn sim2_seed_changes_output() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_ok(&["sim2", "--reps", "5", "--batches", "1", "--seed", "1", "--out", path_str(&a)]);
    run_ok(&["sim2", "--reps", "5", "--batches", "1", "--seed", "2", "--out", path_str(&b)]);
    assert_ne!(fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
}

#[test]
fn prior_report_for_builtin_corpus() {
    let report = run_ok(&["prior"]);
    assert_eq!(report["command"], "prior");
    assert!(report["prior_theta_mean"].as_f64().unwrap() < 0.5);
    let rows = report["records"]["prior"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let p = |v: &str| {
        rows.iter().find(|r| r["verb"] == v).unwrap()["p_do"].as_f64().unwrap()
    };
    assert!(p("give") > p("show"));
}

#[test]
fn echoed_config_replays_run() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus.csv");
    fs::write(&corpus, "verb,do,po\ngive,10,5\nshow,2,6\nsend,3,3\n").unwrap();
    let first = run_ok(&["sim1", "--corpus", path_str(&corpus), "--alpha", "3.5", "--grid", "201", "--items", "6"]);

    let cfg = &first["config"];
    let replay_corpus = dir.path().join("replay.csv");
    fs::write(&replay_corpus, first["corpus"].as_str().unwrap()).unwrap();
    let second = run_ok(&[
        "sim1",
        "--corpus", path_str(&replay_corpus),
        "--alpha", &cfg["alpha"].to_string(),
        "--grid", &cfg["grid_size"].to_string(),
        "--seed", &cfg["seed"].to_string(),
        "--reps", &cfg["replications"].to_string(),
        "--items", &cfg["n_items"].to_string(),
        "--batches", &cfg["max_batches"].to_string(),
        "--batch-size", &cfg["batch_size"].to_string(),
    ]);
    assert_eq!(first, second);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "verb,do,po\ngive,1,2\nx,-1,2\n").unwrap();
    let out = priming(&["prior", "--corpus", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "verb,do,po\nloan,0,0\npost,0,0\n").unwrap();
    assert_eq!(priming(&["prior", "--corpus", path_str(&empty)]).status.code(), Some(3));

    let missing = dir.path().join("missing.csv");
    let out = priming(&["sim1", "--corpus", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    assert_eq!(priming(&["sim1", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(priming(&["prior", "--alpha", "0"]).status.code(), Some(2));
    assert_eq!(priming(&["sim1", "--grid", "2"]).status.code(), Some(2));
}

#[test]
fn sweep_reports_each_alpha() {
    let out = priming(&["sweep", "--alphas", "2,5", "--reps", "3", "--items", "9", "--grid", "101"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("alpha,prior_theta_mean,"));
    assert!(lines[1].starts_with("2,") && lines[2].starts_with("5,"));
}

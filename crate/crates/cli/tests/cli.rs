use capspec::record::RunRecord;
use capspec::{run, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};
use capspec_core::model::Discretization;
use capspec_core::solver::relative_residual;
use std::path::Path;
use std::process::Command;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("capspec").chain(args.iter().copied()).map(String::from).collect()
}

fn code(args: &[&str]) -> i32 {
    run(argv(args))
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_capspec"))
}

fn read_record(path: &Path) -> RunRecord {
    RunRecord::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unit_tube_at_right_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    assert_eq!(code(&["p1", "--b", "1", "--psib", "pi/2", "--quiet", "--out", out.to_str().unwrap()]), EXIT_OK);
    let rec = read_record(&out);
    assert_eq!(rec.n, 15);
    assert_eq!(rec.nodes.len(), 15);
    assert!(rec.ell > 0.0);
    assert_eq!(rec.problem, "p1");
}

#[test]
fn annulus_plot_marks_both_walls() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("out.svg");
    let args = ["p2", "--a", "1", "--b", "3", "--psia", "-5*pi/8", "--psib", "3*pi/8", "--quiet", "--plot", plot.to_str().unwrap()];
    assert_eq!(code(&args), EXIT_OK);
    let svg = std::fs::read_to_string(&plot).unwrap();
    let walls: Vec<&str> = svg.lines().filter(|l| l.contains(r#"class="wall""#)).collect();
    assert_eq!(walls.len(), 2);
    assert!(walls[0].contains(r#"data-r="1""#));
    assert!(walls[1].contains(r#"data-r="3""#));
    assert_eq!(svg.matches(r#"class="node""#).count(), 15);
    assert!(svg.contains("<polyline"));
}

#[test]
fn argument_errors_exit_with_usage() {
    for args in [
        vec!["p1", "--b", "0", "--psib", "pi/2"],
        vec!["p1", "--b", "1"],
        vec!["p1", "--b", "1", "--psib", "half"],
        vec!["p2", "--a", "3", "--b", "1", "--psia", "0", "--psib", "0"],
        vec!["p1", "--b", "1", "--psib", "pi/2", "--n0", "16"],
        vec!["p1", "--b", "1", "--psib", "pi/2", "--out", "run.txt"],
        vec!["frobnicate"],
    ] {
        let out = binary().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("Usage: capspec"), "{args:?}: {err}");
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(binary().arg("--help").output().unwrap().status.code(), Some(EXIT_OK));
}

#[test]
fn solver_failure_reports_json() {
    let out = binary()
        .args(["p1", "--b", "20", "--psib", "7*pi/8", "--max-iter-bvp", "1", "--max-iter-newton", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_SOLVER));
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "failed");
    assert_eq!(diag["problem"], "p1");
    assert!(diag["reason"].as_str().unwrap().len() > 0);
    assert!(diag["refinements"].is_array());
}

#[test]
fn json_round_trip_reproduces_residual() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("p1", vec!["p1", "--b", "0.5", "--psib", "7*pi/8"]),
        ("p2", vec!["p2", "--a", "0.1", "--b", "1", "--psia", "-3*pi/8", "--psib", "5*pi/8"]),
        ("p3", vec!["p3", "--a", "-1", "--b", "2", "--psia", "pi/6", "--psib", "-pi/3"]),
    ] {
        let out = dir.path().join(format!("{name}.json"));
        let mut full = args.clone();
        full.extend(["--quiet", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&full), EXIT_OK, "{args:?}");
        let rec = read_record(&out);
        let disc = Discretization::new(rec.n).unwrap();
        let res = relative_residual(&rec.spec().unwrap(), &disc, &rec.state());
        assert!((res - rec.res_bvp).abs() < 1e-10, "{name}: {res} vs {}", rec.res_bvp);
    }
}

#[test]
fn csv_matches_json_samples() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("a.json");
    let csv_path = dir.path().join("a.csv");
    let base = ["p2", "--a", "1", "--b", "3", "--psia", "-pi/3", "--psib", "pi/6", "--quiet", "--out"];
    for p in [&json, &csv_path] {
        let mut args = base.to_vec();
        args.push(p.to_str().unwrap());
        assert_eq!(code(&args), EXIT_OK);
    }
    let rec = read_record(&json);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["tau", "r", "u", "psi"]);
    let rows: Vec<capspec::record::Sample> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows, rec.samples);
    assert_eq!(rows.len(), 10 * rec.n + rec.n - 2);
}

#[test]
fn flat_planar_curve_lies_on_the_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat.csv");
    let args = ["p3", "--a", "0", "--b", "2", "--psia", "0", "--psib", "0", "--quiet", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), EXIT_OK);
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<capspec::record::Sample> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|s| s.u == 0.0 && s.psi == 0.0));
}

#[test]
fn repeated_runs_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = vec![];
    for k in 0..2 {
        let out = dir.path().join(format!("{k}.json"));
        let args = ["p1", "--b", "2", "--psib", "-3*pi/8", "--quiet", "--out", out.to_str().unwrap()];
        assert_eq!(code(&args), EXIT_OK);
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        v["wall_time_s"] = serde_json::Value::Null;
        texts.push(v.to_string());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn marked_minimum_is_circled() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("min.svg");
    let args = ["p3", "--a", "1", "--b", "9", "--psia", "-7*pi/8", "--psib", "7*pi/8", "--quiet", "--mark-min", "--stretch", "--plot", plot.to_str().unwrap()];
    assert_eq!(code(&args), EXIT_OK);
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(svg.matches(r#"class="minimum""#).count(), 1);
}

#[test]
fn disc1_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disc1.csv");
    let status = binary()
        .args(["table", "--id", "disc1", "--quiet", "--out", out.to_str().unwrap()])
        .env("CAPSPEC_JOBS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "n_final").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[col] == "15"));
}

#[test]
fn ann3_table() {
    let out = binary().args(["table", "--id", "ann3", "--quiet", "--jobs", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let col = reader.headers().unwrap().iter().position(|h| h == "n_final").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| &r[col] == "15"));
}

#[test]
fn bad_jobs_environment_is_an_argument_error() {
    let out = binary()
        .args(["table", "--id", "disc1", "--quiet"])
        .env("CAPSPEC_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

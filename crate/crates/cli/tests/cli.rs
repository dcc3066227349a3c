use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lasso_geo::formats::spec_to_json;
use lasso_geo::{Dataset, Divisor, ProblemSpec};
use nalgebra::{DMatrix, DVector};
use serde_json::Value;
use tempfile::TempDir;

const HYPOTHETICAL_CSV: &str = "\
x1,x2,x3,y
-1.62553679,-1.45872292,-1.29498175,-1.71048007
0.81876630,1.12398462,-1.34295625,-0.71992247
0.43204938,-0.32403703,0.10801234,-0.21602469
0.02419136,-0.06153051,-0.08845401,0.09645148
1.62553679,1.45872292,1.29498175,1.71048007
-0.81876630,-1.12398462,1.34295625,0.71992247
-0.43204938,0.32403703,-0.10801234,0.21602469
-0.02419136,0.06153051,0.08845401,-0.09645148
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasso-geo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn moments(
    dir: &TempDir,
    name: &str,
    p: usize,
    k: &[f64],
    b: &[f64],
    sigma: Option<f64>,
) -> PathBuf {
    let spec = ProblemSpec::from_moments(
        DMatrix::from_row_slice(p, p, k),
        DVector::from_row_slice(b),
        sigma,
    )
    .unwrap();
    let path = dir.path().join(name);
    std::fs::write(&path, spec_to_json(&spec)).unwrap();
    path
}

fn transfer3d(dir: &TempDir) -> PathBuf {
    moments(
        dir,
        "transfer3d.json",
        3,
        &[1.0, 0.9, 0.3, 0.9, 1.0, 0.1, 0.3, 0.1, 1.0],
        &[0.6, 0.5, 0.9],
        None,
    )
}

fn prostate2(dir: &TempDir) -> PathBuf {
    moments(
        dir,
        "prostate.json",
        2,
        &[1.0, 0.2805, 0.2805, 1.0],
        &[0.8478, 0.5002],
        Some(1.332476),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn trace_reports_resurgence() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let v: Value = serde_json::from_str(&run_ok(&[
        "trace",
        "--input",
        s(&input),
        "--kind",
        "moments-json",
    ]))
    .unwrap();
    let enter = v["events"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["kind"] == "enter")
        .expect("enter event");
    assert_eq!(enter["index"], 1);
    assert_eq!(enter["new_sign"], 1);
    assert!((enter["s"].as_f64().unwrap() + 0.3333).abs() < 1e-3);
}

#[test]
fn eval_beyond_center_echoes_center() {
    let dir = TempDir::new().unwrap();
    let input = prostate2(&dir);
    let v: Value =
        serde_json::from_str(&run_ok(&["eval", "--input", s(&input), "--at-t", "10000"])).unwrap();
    let beta: Vec<f64> = v["beta"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((beta[0] - 0.767922).abs() < 2e-3 && (beta[1] - 0.284779).abs() < 2e-3);
    assert_eq!(v["s"].as_f64(), Some(0.0));
}

#[test]
fn eval_csv_row_and_lambda_query() {
    let dir = TempDir::new().unwrap();
    let input = prostate2(&dir);
    let out = run_ok(&[
        "eval",
        "--input",
        s(&input),
        "--at-lambda",
        "0.005",
        "--lambda-scale",
        "2",
        "--format",
        "csv",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "s,lambda,t,beta_1,beta_2");
    assert_eq!(lines.len(), 2);
    let cells: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], -0.01);
    assert!((cells[3] - 0.760114).abs() < 2e-3);
}

#[test]
fn csv_grid_is_log_spaced_from_lambda_max() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let out = run_ok(&[
        "trace",
        "--input",
        s(&input),
        "--format",
        "csv",
        "--grid",
        "5",
    ]);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!((rows[0][1] - 0.9).abs() < 1e-15);
    assert!(rows[0][3..].iter().all(|&b| b == 0.0));
    assert!((rows[4][1] - 0.9e-4).abs() < 1e-15);
    assert!((rows[1][1] / rows[0][1] - 0.1).abs() < 1e-12);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let a = run_ok(&["trace", "--input", s(&input)]);
    let b = run_ok(&["trace", "--input", s(&input)]);
    assert_eq!(a, b);
    let a = run_ok(&["verify", "--trials", "20", "--seed", "3"]);
    let b = run_ok(&["verify", "--trials", "20", "--seed", "3"]);
    assert_eq!(a, b);
}

#[test]
fn ingest_then_trace_matches_direct_trace() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, HYPOTHETICAL_CSV).unwrap();
    let moments = dir.path().join("moments.json");
    run_ok(&[
        "ingest",
        "--input",
        s(&csv),
        "--response",
        "y",
        "--output",
        s(&moments),
    ]);
    let direct: Value =
        serde_json::from_str(&run_ok(&["trace", "--input", s(&csv), "--response", "y"])).unwrap();
    let via: Value = serde_json::from_str(&run_ok(&["trace", "--input", s(&moments)])).unwrap();
    let (a, b) = (
        direct["events"].as_array().unwrap(),
        via["events"].as_array().unwrap(),
    );
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x["kind"], y["kind"]);
        assert!((x["s"].as_f64().unwrap() - y["s"].as_f64().unwrap()).abs() <= 1e-12);
    }
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&moments).unwrap()).unwrap();
    assert_eq!(m["names"], serde_json::json!(["x1", "x2", "x3"]));
    assert!((m["K1"][0][1].as_f64().unwrap() - 0.9).abs() < 1e-6);
}

#[test]
fn divisor_flag_scales_moments() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, HYPOTHETICAL_CSV).unwrap();
    let v: Value = serde_json::from_str(&run_ok(&[
        "ingest",
        "--input",
        s(&csv),
        "--response",
        "y",
        "--divisor",
        "n",
    ]))
    .unwrap();
    assert!((v["K1"][0][0].as_f64().unwrap() - 7.0 / 8.0).abs() < 1e-6);
}

#[test]
fn synth_reproduces_covariance() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let out = run_ok(&["synth", "--input", s(&input)]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let x = DMatrix::from_fn(rows.len(), 3, |r, c| rows[r][c]);
    let k = Dataset::new(x, None, Divisor::NMinusOne)
        .unwrap()
        .predictor_covariance(false)
        .unwrap();
    let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.3, 0.9, 1.0, 0.1, 0.3, 0.1, 1.0]);
    assert!((k - want).amax() < 1e-12);
}

#[test]
fn oracle_check_random_batch() {
    let out = run_ok(&["oracle-check", "--p", "4", "--trials", "50", "--seed", "7"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 50);
    assert!(v["max_path_vs_kkt"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_single_problem() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let v: Value = serde_json::from_str(&run_ok(&["verify", "--input", s(&input)])).unwrap();
    let problem = &v["problems"][0];
    assert_eq!(problem["report"]["orthant_count"], 2);
    assert_eq!(
        problem["report"]["resurgent_coordinates"],
        serde_json::json!([1])
    );
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_fails_on_double_sign_change() {
    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/double_sign_change.json");
    let out = run(&["verify", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failed_checks"], 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["trace", "--input", "/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );

    let garbled = dir.path().join("bad.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    assert_eq!(
        run(&["trace", "--input", s(&garbled)]).status.code(),
        Some(2)
    );

    let singular = dir.path().join("singular.json");
    std::fs::write(
        &singular,
        r#"{"p": 2, "K1": [[1, 1], [1, 1]], "b": [1, 0]}"#,
    )
    .unwrap();
    let out = run(&["trace", "--input", s(&singular)]);
    assert_eq!(out.status.code(), Some(1));
    let log: Value =
        serde_json::from_slice(out.stderr.split(|&c| c == b'\n').next().unwrap()).unwrap();
    assert_eq!(log["level"], "error");

    let input = transfer3d(&dir);
    assert_eq!(
        run(&["eval", "--input", s(&input), "--at-s", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["eval", "--input", s(&input)]).status.code(), Some(2));

    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, HYPOTHETICAL_CSV).unwrap();
    assert_eq!(run(&["trace", "--input", s(&csv)]).status.code(), Some(1));
    std::fs::write(&csv, "a,b\n1,x\n").unwrap();
    assert_eq!(
        run(&["trace", "--input", s(&csv), "--response", "b"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn info_logging_goes_to_stderr_as_json() {
    let dir = TempDir::new().unwrap();
    let input = transfer3d(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_lasso-geo"))
        .args(["trace", "--input", s(&input)])
        .env("LASSO_GEO_LOG", "info")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let first: Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert_eq!(first["level"], "info");
}

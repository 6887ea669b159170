//! Drives the built binary: exit codes, CSV/SVG artefacts and config merging.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spectral-gap-lab");

fn lab(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SGL_JOBS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing {key} in {v}"))
}

const SMALL_SWEEP: [&str; 8] = [
    "--L-min", "20", "--L-max", "80", "--points", "5", "--tol", "1e-8",
];

#[test]
fn solve_free_box() {
    let out = lab(&["solve", "--kind", "zero", "--L", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v, "gap") - PI * PI / 100.0).abs() < 1e-6 * PI * PI / 100.0);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn solve_agrees_with_quantization() {
    let solve = json(&lab(&["solve", "--L", "50"]));
    let quant = json(&lab(&["quantization", "--L", "50"]));
    let (a, b) = (num(&solve, "lambda0"), num(&quant, "lambda0"));
    assert!((a - b).abs() <= 1e-8 * b, "{a} {b}");
    assert!(num(&quant, "separation") > 0.0);
}

#[test]
fn invalid_length_exits_2() {
    let out = lab(&["solve", "--L", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("L must be positive"));
}

#[test]
fn invalid_jobs_env_exits_2() {
    let out = Command::new(BIN)
        .args([
            "sweep", "--kind", "zero", "--L-min", "10", "--L-max", "20", "--points", "2",
        ])
        .env("SGL_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_bounds_rejects_free_potential() {
    let out = lab(&[
        "verify-bounds",
        "--kind",
        "zero",
        "--L-min",
        "10",
        "--L-max",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_bounds_small_step_sweep() {
    let mut args = vec!["verify-bounds"];
    args.extend(SMALL_SWEEP);
    let out = lab(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"], 5);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

fn tick_spacing(svg: &str, anchor: &str, coord: &str) -> f64 {
    let pos: Vec<f64> = svg
        .lines()
        .filter(|l| l.contains(&format!(r#"text-anchor="{anchor}">1e"#)))
        .map(|l| {
            let key = format!(r#"{coord}=""#);
            let rest = l.split(&key).nth(1).unwrap();
            rest[..rest.find('"').unwrap()].parse().unwrap()
        })
        .collect();
    (pos[1] - pos[0]).abs()
}

fn polyline(svg: &str, name: &str) -> Vec<(f64, f64)> {
    let tag = format!(r#"data-series="{name}""#);
    let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
    let pts = line
        .split("points=\"")
        .nth(1)
        .unwrap()
        .trim_end_matches("\"/>");
    pts.split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn free_sweep_writes_csv_and_inverse_square_chart() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("free.csv");
    let svg = dir.path().join("free.svg");
    let out = lab(&[
        "sweep",
        "--kind",
        "zero",
        "--L-min",
        "10",
        "--L-max",
        "1000",
        "--points",
        "5",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("L,lambda0,lambda1,gap,"));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 18);
    }

    let svg = std::fs::read_to_string(&svg).unwrap();
    let ppd_x = tick_spacing(&svg, "middle", "x");
    let ppd_y = tick_spacing(&svg, "end", "y");
    let pts = polyline(&svg, "gap");
    assert_eq!(pts.len(), 5);
    for w in pts.windows(2) {
        let slope = -(w[1].1 - w[0].1) / ppd_y / ((w[1].0 - w[0].0) / ppd_x);
        assert!((slope + 2.0).abs() < 0.01, "{slope}");
    }
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let run = |jobs: &str| {
        let mut args = vec!["sweep", "--kind", "trapezoid", "--jobs", jobs];
        args.extend(SMALL_SWEEP);
        let out = lab(&args);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    assert_eq!(one, run("1"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "zero", "L": 10.0}"#);
    let v = json(&lab(&["solve", "--config", &cfg]));
    assert!((num(&v, "gap") - PI * PI / 100.0).abs() < 1e-9);

    let v = json(&lab(&["solve", "--config", &cfg, "--L", "20"]));
    assert!((num(&v, "gap") - PI * PI / 400.0).abs() < 1e-9);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "zero", "length": 10.0}"#);
    assert_eq!(lab(&["solve", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn fit_exponent_on_free_sweep() {
    let out = lab(&[
        "fit-exponent",
        "--kind",
        "zero",
        "--L-min",
        "50",
        "--L-max",
        "800",
        "--points",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v, "exponent_p") - 2.0).abs() < 1e-3);
    assert!((num(&v, "amplitude_c") / (PI * PI) - 1.0).abs() < 1e-3);
}

#[test]
fn fit_exponent_needs_five_points() {
    let out = lab(&[
        "fit-exponent",
        "--kind",
        "zero",
        "--L-min",
        "50",
        "--L-max",
        "800",
        "--points",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

//! End-to-end runs of the `immigration` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

struct Run {
    code: i32,
    summary: Value,
    out: PathBuf,
}

fn run(dir: &Path, args: &[&str], config: &Value) -> Run {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, serde_json::to_vec_pretty(config).unwrap()).unwrap();
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_immigration"))
        .args(args)
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "stdout: {stdout}");
    Run { code: output.status.code().unwrap(), summary: serde_json::from_str(&stdout).unwrap(), out }
}

fn exp1() -> Value {
    json!({"family": "exponential", "rate": 1.0})
}

fn mm_inf(n: usize) -> Value {
    json!({
        "schema": 1,
        "seed": 7,
        "law": exp1(),
        "kernel": {"kind": "indicator", "eta": exp1()},
        "t_list": [30.0],
        "u_grid": [0.0],
        "n_replicates": n,
    })
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&read(path)).unwrap()
}

#[test]
fn simulate_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), &["simulate"], &mm_inf(100));
    assert_eq!(r.code, 0, "{}", r.summary);
    let first = read(&r.out.join("transient_0.csv"));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "u=0");
    assert_eq!(lines.len(), 101);
    assert!(lines[1..].iter().all(|l| !l.contains(',') && l.parse::<f64>().is_ok()));
    let meta = json_file(&r.out.join("metadata.json"));
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["samples"][0]["rows"], 100);

    let r2 = run(dir.path(), &["simulate"], &mm_inf(100));
    assert_eq!(read(&r2.out.join("transient_0.csv")), first);
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(100);
    c["n_replicates"] = json!(-5);
    let r = run(dir.path(), &["simulate"], &c);
    assert_eq!(r.code, 1);
    assert_eq!(r.summary["status"], "error");
    assert!(r.summary["message"].as_str().unwrap().contains("n_replicates"), "{}", r.summary);

    let mut c = mm_inf(100);
    c.as_object_mut().unwrap().remove("seed");
    let r = run(dir.path(), &["simulate"], &c);
    assert_eq!(r.code, 1);
    assert!(r.summary["message"].as_str().unwrap().contains("seed"));
}

#[test]
fn usage_errors_exit_one() {
    let s = Command::new(env!("CARGO_BIN_EXE_immigration")).arg("frobnicate").output().unwrap();
    assert_eq!(s.status.code(), Some(1));
    let s = Command::new(env!("CARGO_BIN_EXE_immigration")).arg("--help").output().unwrap();
    assert_eq!(s.status.code(), Some(0));
    let s = Command::new(env!("CARGO_BIN_EXE_immigration"))
        .args(["simulate", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(1));
}

#[test]
fn point_mass_window_has_exact_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(10);
    c["law"] = json!({"family": "point_mass", "value": 2.0});
    c["window_c"] = json!(3.0);
    let r = run(dir.path(), &["stationary", "--dump-window"], &c);
    assert_eq!(r.code, 0, "{}", r.summary);
    let text = read(&r.out.join("window.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,point"));
    let pts: Vec<(i64, f64)> = lines
        .map(|l| {
            let (k, t) = l.split_once(',').unwrap();
            (k.parse().unwrap(), t.parse().unwrap())
        })
        .collect();
    assert!(pts.first().unwrap().1 < -3.0 && pts.last().unwrap().1 > 3.0);
    for w in pts.windows(2) {
        assert_eq!(w[1].0, w[0].0 + 1);
        let gap = w[1].1 - w[0].1;
        // Every gap is the lattice span up to rounding of the shifted points.
        assert!((gap - 2.0).abs() < 1e-12, "{w:?}");
    }
    let straddle = pts.iter().position(|p| p.0 == 0).unwrap();
    assert!(pts[straddle - 1].1 < 0.0 && pts[straddle].1 >= 0.0);
    assert_eq!(pts[straddle - 1].0, -1);
}

#[test]
fn zero_kernel_gives_zero_column() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(50);
    c["kernel"] = json!({"kind": "deterministic_table", "breakpoints": [0.0, 1.0], "values": [0.0, 0.0]});
    let r = run(dir.path(), &["stationary"], &c);
    assert_eq!(r.code, 0, "{}", r.summary);
    let text = read(&r.out.join("stationary.csv"));
    assert!(text.lines().skip(1).all(|l| l == "0.0000000000000000e0"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn truncation_failure_exits_two_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(10);
    c["kernel"] = json!({"kind": "scaled_exp_decay", "eta": {"family": "point_mass", "value": 1.0}, "a": 1.0});
    c["tol"] = json!(1e-300);
    let r = run(dir.path(), &["stationary"], &c);
    assert_eq!(r.code, 2, "{}", r.summary);
    let t = json_file(&r.out.join("truncation.json"));
    assert!(t["failure"]["reason"].is_string());
    assert_eq!(t["failure"]["tol"], 1e-300);
    assert!(!r.out.join("stationary.csv").exists());
}

#[test]
fn converge_examples() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(10_000);
    c["u_grid"] = json!([0.0, 1.0, 5.0]);
    c["t_list"] = json!([1.0, 30.0]);
    let r = run(dir.path(), &["converge"], &c);
    assert_eq!(r.code, 0, "{}", r.summary);
    let summary = read(&r.out.join("summary.csv"));
    assert!(summary.starts_with("t,ks_p_u=0,ks_p_u=1,ks_p_u=5,energy_p,reject\n"));
    let first = json_file(&r.out.join("comparison_0.json"));
    assert_eq!(first["reject"], true);
    let last = json_file(&r.out.join("comparison_1.json"));
    assert_eq!(last["reject"], false);

    c["t_list"] = json!([1.0]);
    let r = run(dir.path(), &["converge"], &c);
    assert_eq!(r.code, 2, "{}", r.summary);

    let mut c = mm_inf(200);
    c["kernel"] = json!({"kind": "indicator", "eta": {"family": "pareto", "alpha": 0.8, "xm": 1.0}});
    c["dri"] = json!({"k_max": 100, "n_mc": 500});
    let r = run(dir.path(), &["converge"], &c);
    assert_eq!(r.code, 3, "{}", r.summary);
    assert!(r.summary["message"].as_str().unwrap().contains("E tau = inf"), "{}", r.summary);
}

#[test]
fn dri_examples() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = mm_inf(10);
    c["kernel"] = json!({"kind": "scaled_exp_decay", "eta": {"family": "point_mass", "value": 1.0}, "a": 1.0});
    let r = run(dir.path(), &["dri"], &c);
    assert_eq!(r.code, 0, "{}", r.summary);
    let mean = json_file(&r.out.join("dri_mean.json"));
    assert_eq!(mean["verdict"], "convergent_evidence");
    let terms = read(&r.out.join("dri_terms.csv"));
    assert_eq!(terms.lines().count(), 201);

    c["kernel"] = json!({"kind": "spikes", "eta": {"family": "uniform", "lo": 0.0, "hi": 1.0}, "count": 40});
    c["dri"] = json!({"k_max": 40, "grid_per_unit": 50, "n_mc": 20000});
    let r = run(dir.path(), &["dri"], &c);
    assert_eq!(r.code, 3, "{}", r.summary);
    let msg = r.summary["message"].as_str().unwrap();
    assert!(msg.contains("disagree") && msg.contains("mean criterion convergent (exit 0)"), "{msg}");
    assert!(msg.contains("path criterion divergent (exit 2)"), "{msg}");

    c["kernel"] = json!({"kind": "indicator", "eta": {"family": "pareto", "alpha": 0.8, "xm": 1.0}});
    c["dri"] = json!({"k_max": 1000, "grid_per_unit": 4, "n_mc": 2000});
    let r = run(dir.path(), &["dri"], &c);
    assert_eq!(r.code, 2, "{}", r.summary);
}

#[test]
fn pointprocess_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c = mm_inf(10);
    let r = run(dir.path(), &["pointprocess"], &c);
    assert_eq!(r.code, 0, "{}", r.summary);
    let rep = json_file(&r.out.join("pointprocess.json"));
    for check in ["intensity", "overshoot", "shift_invariance", "laplace"] {
        assert_eq!(rep[check]["pass"], true, "{check}");
    }
    assert_eq!(rep["warnings"], json!([]));

    let mut c = mm_inf(10);
    c["law"] = json!({"family": "point_mass", "value": 1.0});
    let r = run(dir.path(), &["pointprocess"], &c);
    assert_eq!(r.code, 3, "{}", r.summary);
    let rep = json_file(&r.out.join("pointprocess.json"));
    assert_eq!(rep["warnings"].as_array().unwrap().len(), 1);
    assert!(rep["warnings"][0].to_string().contains("lattice"), "{}", rep["warnings"]);

    let mut c = mm_inf(10);
    c["law"] = json!({"family": "uniform", "lo": 0.0, "hi": 1.0});
    let r = run(dir.path(), &["pointprocess"], &c);
    let rep = json_file(&r.out.join("pointprocess.json"));
    assert_eq!(rep["overshoot"]["pass"], true, "{}", rep["overshoot"]);
}

#[test]
fn output_dir_defaults_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, mm_inf(5).to_string()).unwrap();
    let s = Command::new(env!("CARGO_BIN_EXE_immigration")).arg("simulate").arg(&cfg).output().unwrap();
    assert_eq!(s.status.code(), Some(0));
    assert!(dir.path().join("out").join("transient_0.csv").exists());
}

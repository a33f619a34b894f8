use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn metrofold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metrofold"))
        .args(args)
        .env_remove("METROFOLD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "multi-line error: {err}");
    serde_json::from_str(err.trim()).expect("error line is json")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn info_prints_summary() {
    let path = data("dipeptide.json");
    let out = stdout(&metrofold(&["info", "--landscape", path.to_str().unwrap()]));
    for line in ["K=2", "b=1", "space=4", "ground=(0,0)"] {
        assert!(out.lines().any(|l| l == line), "missing {line} in\n{out}");
    }
}

#[test]
fn run_quantum_zero_beta_is_quarter() {
    let path = data("dipeptide.json");
    let out = stdout(&metrofold(&[
        "run-quantum", "--landscape", path.to_str().unwrap(), "--schedule", "fixed", "--beta", "0", "--steps", "2",
    ]));
    assert!(out.starts_with("# config: {"));
    assert!(out.lines().any(|l| l == "t,beta,p,tts"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let p: f64 = r[2].parse().unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn run_classical_exact_and_sampled() {
    let path = data("dipeptide.json");
    let p = path.to_str().unwrap();
    let exact = stdout(&metrofold(&["run-classical", "--landscape", p, "--schedule", "linear", "--beta1", "0.5", "--steps", "10"]));
    let sampled = stdout(&metrofold(&[
        "run-classical", "--landscape", p, "--schedule", "linear", "--beta1", "0.5", "--steps", "10", "--sample", "--seed", "4",
    ]));
    let again = stdout(&metrofold(&[
        "run-classical", "--landscape", p, "--schedule", "linear", "--beta1", "0.5", "--steps", "10", "--sample", "--seed", "4",
    ]));
    assert_eq!(sampled, again);
    assert!(exact.lines().any(|l| l == "t,p,stderr,tts"));
    let (e, s) = (csv_rows(&exact), csv_rows(&sampled));
    assert_eq!(e.len(), 10);
    for (a, b) in e.iter().zip(&s) {
        let (pe, ps, se): (f64, f64, f64) = (a[1].parse().unwrap(), b[1].parse().unwrap(), b[2].parse().unwrap());
        assert_eq!(a[2], "0.0");
        assert!((pe - ps).abs() <= 4.0 * se.max(1e-3), "{pe} vs {ps}");
    }
}

#[test]
fn compare_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let suite = data("suite.json");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = metrofold(&["compare", "--suite", suite.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(out.with_extension("json")).unwrap())
    };
    let (csv_a, json_a) = run("a.csv");
    let (csv_b, json_b) = run("b.csv");
    assert_eq!(csv_a, csv_b);
    assert_eq!(json_a, json_b);
    let header = csv_a.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "instance_id,K,bits,space_size,schedule,init,classical_min_tts,classical_argmin_t,quantum_min_tts,quantum_argmin_t"
    );
    assert_eq!(csv_rows(&csv_a).len(), 3);
    let report: serde_json::Value = serde_json::from_str(&json_a).unwrap();
    assert!(report["fits"]["advantage_slope"].is_f64());
    assert_eq!(report["config"]["seed"], 7);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_metrofold"))
        .args(["gen-landscape", "--n-angles", "2", "--bits", "2", "--seed", "9"])
        .env("METROFOLD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let file = dir.path().join("synthetic-dihedral_cosine-s9-k2-b2.json");
    let l = metrofold::landscape::load_landscape(&file).unwrap();
    assert_eq!(l.space_size(), 16);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "temporary files left behind: {names:?}");
}

#[test]
fn export_qasm_writes_parsable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.qasm");
    let path = data("dipeptide.json");
    let args = ["export-qasm", "--landscape", path.to_str().unwrap(), "--beta1-step", "0.1", "--beta2-step", "1", "--out", out.to_str().unwrap()];
    assert!(metrofold(&args).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(metrofold(&args).status.success());
    assert_eq!(text, std::fs::read_to_string(&out).unwrap());
    assert!(text.contains("// grouping_error: "));
    assert!(text.contains("// config: "));
    let prog = metrofold::qasm::parse_qasm(&text).unwrap();
    assert_eq!(prog.n_qubits, 4);
}

#[test]
fn spectral_check_reports_bounds() {
    let path = data("dipeptide.json");
    let out = stdout(&metrofold(&["spectral-check", "--landscape", path.to_str().unwrap(), "--beta", "1", "--bipartite"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["bounds_hold"], true);
    assert_eq!(v["similarity_check"], true);
    assert!(v["bipartite"]["phase_mismatch"].as_f64().unwrap() < 1e-7);
}

#[test]
fn t_test_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.json");
    std::fs::write(&counts, r#"{"a": {"successes": 60, "trials": 100}, "b": {"successes": 40, "trials": 100}}"#).unwrap();
    let out = stdout(&metrofold(&["t-test", "--counts", counts.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["p_value"].as_f64().unwrap() - 0.004519230252214062).abs() < 1e-6);
}

#[test]
fn config_file_merges_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let path = data("dipeptide.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"landscape": path, "schedule": "fixed", "beta": 0.0, "steps": 5}).to_string(),
    )
    .unwrap();
    let out = stdout(&metrofold(&["run-quantum", "--config", cfg.to_str().unwrap(), "--steps", "3"]));
    assert_eq!(csv_rows(&out).len(), 3);
}

#[test]
fn errors_are_single_json_lines() {
    let path = data("dipeptide.json");
    let p = path.to_str().unwrap();
    let e = error_json(&metrofold(&["run-quantum", "--landscape", p, "--schedule", "geometric", "--beta", "3"]));
    assert_eq!(e["error"], "config");
    let e = error_json(&metrofold(&["run-classical", "--landscape", p, "--bogus"]));
    assert_eq!(e["error"], "usage");
    let e = error_json(&metrofold(&["run-quantum", "--synthetic", "uniform_random", "--n-angles", "14", "--bits", "2", "--max-qubits", "20"]));
    assert_eq!(e["error"], "size_guard");
    let e = error_json(&metrofold(&["info", "--landscape", "/nonexistent.json"]));
    assert_eq!(e["error"], "io");
    let e = error_json(&metrofold(&["export-qasm", "--synthetic", "uniform_random", "--n-angles", "2", "--bits", "2"]));
    assert_eq!(e["error"], "unsupported");
    let e = error_json(&metrofold(&["run-classical", "--landscape", p, "--init", "vonmises"]));
    assert_eq!(e["error"], "missing_guess");
}

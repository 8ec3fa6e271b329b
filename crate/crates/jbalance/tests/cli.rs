use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jbalance")).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, json: &str) {
    std::fs::write(dir.join("c.json"), json).unwrap();
}

#[test]
fn success_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), r#"{"preset": "P2-O1-O1", "k_list": [2]}"#);
    let out = run(&["balance", "--config", "c.json", "--out", "res", "--k-list", "2,3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("k=3"));
    assert!(dir.path().join("res/balance/k3_form.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "{}");
    assert_eq!(run(&["verify", "--config", "c.json"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify", "--config", "missing.json"], dir.path()).status.code(), Some(2));
    write_config(dir.path(), r#"{"preset": "nowhere"}"#);
    let out = run(&["stability", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown problem preset"));
    write_config(dir.path(), r#"{"preset": "P2-O1-O1"}"#);
    assert_eq!(run(&["balance", "--config", "c.json", "--tol", "-1"], dir.path()).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), r#"{"preset": "P1xP1-O11-O21", "k_list": [3], "max_iterations": 3}"#);
    assert_eq!(run(&["balance", "--config", "c.json"], dir.path()).status.code(), Some(3));
}

#[test]
fn coarse_quadrature_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), r#"{"preset": "P1xP1-O11-O11", "k_list": [4], "resolution": 6}"#);
    let out = run(&["verify", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL k=4 trace identity"));
    assert!(dir.path().join("out/verify/report.json").exists());
}

#[test]
fn stability_output_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), r#"{"preset": "P1xP1-O11-O31", "stability": {"r_max": 3}}"#);
    let out = run(&["stability", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    // 2γL₁ − L₂ = (4, 4) − (3, 1) pairs to 1 with the first ruling
    assert!(stdout.contains("donaldson_necessary Pass margin=1"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("out/stability/r_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "configuration,r,j_weight,df,exceptional,mixed,surface,admissible");
    assert_eq!(csv.lines().count(), 7);
}

//! End-to-end checks of the binary: flag handling, emitted files, the
//! reproducibility record, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn layersolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layersolve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn run_emits_tables_plot_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = layersolve(&[
        "run",
        "--problem", "p2",
        "--scheme", "upwind-uniform,upwind-shishkin",
        "--eps", "2^-6,2^-10",
        "--n", "8,16",
        "--m-policy", "fixed:4",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    // two schemes, one problem: two CSVs, two MDs, one combined SVG
    assert!(out.join("config.json").is_file());
    assert!(out.join("upwind-uniform_p2-p1.csv").is_file());
    assert!(out.join("upwind-shishkin_p2-p1.csv").is_file());
    assert!(out.join("upwind-uniform_p2-p1.md").is_file());
    assert!(out.join("upwind-shishkin_p2-p1.md").is_file());
    assert!(out.join("convergence_p2-p1.svg").is_file());

    let csv = read(&out.join("upwind-uniform_p2-p1.csv"));
    assert!(csv.starts_with("eps,N,M,E,q\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 + 2);

    let svg = read(&out.join("convergence_p2-p1.svg"));
    assert_eq!(svg.matches("<polyline").count(), 2 + 2);
}

#[test]
fn rerunning_from_the_echoed_config_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let status = layersolve(&[
        "run",
        "--problem", "p1",
        "--scheme", "hybrid-gshishkin",
        "--eps", "2^-8,2^-16",
        "--n", "8,16",
        "--m-policy", "fixed:8",
        "--tau0", "0.5",
        "--out-dir", out1.to_str().unwrap(),
    ]);
    assert!(status.status.success());

    // rewrite out-dir inside the echo, keep everything else
    let out2 = dir.path().join("b");
    let echo = read(&out1.join("config.json"))
        .replace(&format!("\"out-dir\": {:?}", out1.to_str().unwrap()), &format!("\"out-dir\": {:?}", out2.to_str().unwrap()));
    let cfg = dir.path().join("replay.json");
    std::fs::write(&cfg, echo).unwrap();
    let status = layersolve(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));

    assert_eq!(
        read(&out1.join("hybrid-gshishkin_p1.csv")),
        read(&out2.join("hybrid-gshishkin_p1.csv"))
    );
}

#[test]
fn surface_emit_writes_per_scheme_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = layersolve(&[
        "run",
        "--problem", "p2",
        "--p", "3",
        "--scheme", "upwind-uniform",
        "--eps", "2^-8",
        "--n", "8",
        "--m-policy", "fixed:4",
        "--emit", "surface",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let surface = read(&out.join("surface_upwind-uniform_p2-p3.csv"));
    assert!(surface.starts_with("x,t,u\n"));
    assert_eq!((surface.lines().count() - 1) % 9, 0);
}

#[test]
fn thread_cap_env_var_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--problem".into(), "p2".into(),
            "--scheme".into(), "upwind-shishkin".into(),
            "--eps".into(), "2^-8,2^-16".into(),
            "--n".into(), "16,32".into(),
            "--out-dir".into(), out.to_str().unwrap().into(),
        ]
    };
    let one = Command::new(env!("CARGO_BIN_EXE_layersolve"))
        .args(args(&a))
        .env("LAYERSOLVE_THREADS", "1")
        .output()
        .unwrap();
    assert!(one.status.success());
    let two = Command::new(env!("CARGO_BIN_EXE_layersolve"))
        .args(args(&b))
        .env("LAYERSOLVE_THREADS", "2")
        .output()
        .unwrap();
    assert!(two.status.success());
    assert_eq!(
        read(&a.join("upwind-shishkin_p2-p1.csv")),
        read(&b.join("upwind-shishkin_p2-p1.csv"))
    );
}

#[test]
fn invalid_arguments_exit_nonzero_with_a_message() {
    let output = layersolve(&["run", "--p", "2"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("odd"));

    let output = layersolve(&["run", "--n", "10"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("divisible by 4"));

    let output = layersolve(&["run", "--scheme", "spectral"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("spectral"));
}

#[test]
fn unknown_config_file_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"tau-zero": 2.0}"#).unwrap();
    let output = layersolve(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("tau-zero"));
}

#[test]
fn mesh_dump_prints_nodes_with_regions() {
    let output = layersolve(&[
        "mesh-dump",
        "--problem", "p2",
        "--kind", "gshishkin",
        "--n", "8",
        "--eps", "2^-10",
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("i,x,region\n"));
    assert_eq!(stdout.lines().count(), 10);
    assert!(stdout.contains("left-layer") && stdout.contains("right-layer"));
}

#[test]
fn level_dump_prints_one_assembled_system() {
    let output = layersolve(&[
        "level-dump",
        "--problem", "p1",
        "--scheme", "hybrid-gshishkin",
        "--n", "8",
        "--m", "4",
        "--eps", "0.25",
        "--level", "2",
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("i,lower,diag,upper,rhs,tag\n"));
    assert_eq!(stdout.lines().count(), 8);
}

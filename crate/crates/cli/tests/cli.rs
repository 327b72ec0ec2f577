use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn noisereg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisereg"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QAOA: &str = "n_starts = 3\n[model]\nkind = \"qaoa-toy\"\nn = 3\n[schedule]\ni_max = 40\n";

#[test]
fn run_then_summarize_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QAOA);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = noisereg(&[
            "run",
            &cfg,
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
            "--parallel",
            "1",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = fs::read(a.join("summary.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("summary.csv")).unwrap());
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 5"));

    let o = noisereg(&["summarize", a.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("mean improvement ratio"));
    assert_eq!(fs::read(a.join("summary.csv")).unwrap(), first);
}

#[test]
fn grid_writes_csv_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{QAOA}[grid]\nmus = [0.0]\naxes = [{{param = 0, lo = 0.0, hi = 1.0, points = 3}}, {{param = 1, lo = 0.0, hi = 1.0, points = 2}}]\n"),
    );
    let out = tmp.path().join("g");
    let o = noisereg(&["grid", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("grids/qaoa-toy_mu0.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn fourier_audit_on_circuit_file() {
    let tmp = tempfile::tempdir().unwrap();
    let circuit = tmp.path().join("c.json");
    fs::write(
        &circuit,
        r#"{"n": 2, "ops": [
            {"kind": "h", "targets": [0]},
            {"kind": "rotation", "pauli": "XY", "param_index": 0},
            {"kind": "noise", "pauli": "XY"},
            {"kind": "rotation", "pauli": "ZX", "param_index": 1, "scale": 2.0},
            {"kind": "noise", "pauli": "ZX"}
        ], "observable": [{"coeff": 0.5, "pauli": "ZZ"}, {"coeff": -1.0, "pauli": "IX"}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("audit");
    let o = noisereg(&[
        "fourier-audit",
        circuit.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--points",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["modes.csv", "audit.csv", "summary.csv", "report.txt"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = noisereg(&["run", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    let bad = write_config(tmp.path(), "[model]\nkind = \"whrf\"\nm = 8\nbogus = 1\n");
    assert!(!noisereg(&["run", &bad]).status.success());

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert!(!noisereg(&["summarize", empty.to_str().unwrap()])
        .status
        .success());

    assert!(!noisereg(&["fourier-audit", "/nonexistent.json"])
        .status
        .success());
}

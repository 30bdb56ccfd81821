//! End-to-end runs of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

use sphvac::cli::{cli_main_with, EXIT_CERTIFY, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
use sphvac::io::series::read_series;
use sphvac::io::snapshot::read_snapshot;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sphvac").chain(args.iter().copied());
    let code = cli_main_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn jump(t_end: f64, extra: &str) -> String {
    format!(
        r#"{{
  "profile": {{
    "density": {{ "kind": "jump", "rho_bar": 1.0 }},
    "velocity": {{ "kind": "compatible_linear" }}
  }},
  "params": {{ "mu": 1.0, "lambda": 1.0, "gamma": 2.0 }},
  "grid": {{ "n_cells": 32 }},
  "stepping": {{ "dt_init": 1e-3, "t_end": {t_end} }}{extra}
}}"#
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_series_snapshots_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        &jump(0.02, r#", "output": { "cadence": 5 }"#),
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = call(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("status: completed"));

    let rows = read_series(&out.join("series.csv")).unwrap();
    let times: Vec<f64> = rows.iter().map(|r| (r.t * 1e3).round()).collect();
    assert_eq!(times, [5.0, 10.0, 15.0, 20.0]);
    assert!(rows
        .iter()
        .all(|r| r.identity_residual.abs() < 1e-3 && r.radius > 1.0));

    let snap = read_snapshot(&out.join("snapshots/000020.json")).unwrap();
    assert_eq!(snap.step, 20);
    assert_eq!(snap.r.len(), 33);
    assert!(out.join("snapshots/000000.json").exists());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("certificate") && report.contains("steps: 20"));
    assert!(!out.join("localized.csv").exists());
}

#[test]
fn zero_horizon_gives_a_header_only_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &jump(0.0, ""));
    let out = dir.path().join("out");
    let (code, _, err) = call(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("t,kinetic,potential,"));
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        &jump(0.01, r#", "monitors": { "localized": true }"#),
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        assert_eq!(call(&["run", s(&cfg), "--out", s(&out)]).0, EXIT_OK);
        let read = |f: &str| std::fs::read(out.join(f)).unwrap();
        outputs.push((
            read("series.csv"),
            read("localized.csv"),
            read("snapshots/000010.json"),
        ));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn energies_of_a_uniform_ball_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{
  "profile": { "density": { "kind": "jump", "rho_bar": 1.0 } },
  "params": { "mu": 1.0, "lambda": 1.0, "gamma": 2.0 },
  "grid": { "n_cells": 64 },
  "stepping": { "t_end": 1.0 }
}"#,
    );
    let (code, out, _) = call(&["energies", s(&cfg)]);
    assert_eq!(code, EXIT_OK);
    // ∫ ρ₀^γ x² dx / (γ − 1) = 1/3
    assert!(out.contains("E0 = 0.333333333333333"), "{out}");
    assert!(out.contains("E1 = 0.000000000000000"));
    assert!(out.contains("no epsilon_bar configured"));
}

#[test]
fn compatible_data_has_no_boundary_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &jump(1.0, ""));
    let (code, out, _) = call(&["check-compat", s(&cfg)]);
    assert_eq!(code, EXIT_OK);
    let value: f64 = out.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(value.abs() <= 1e-12, "{out}");
}

#[test]
fn certify_reports_through_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &jump(0.05, ""));
    let out = dir.path().join("out");
    assert_eq!(call(&["run", s(&cfg), "--out", s(&out)]).0, EXIT_OK);
    let series = out.join("series.csv");

    // the compatible velocity has v/r = rho_bar^gamma / (2 mu + 3 lambda) = 0.2
    let (code, text, _) = call(&["certify", s(&series), "--beta-cfg", "0.25"]);
    assert_eq!(code, EXIT_OK, "{text}");
    assert!(text.contains("PASS"));

    let (code, text, _) = call(&["certify", s(&series)]);
    assert_eq!(code, EXIT_CERTIFY, "{text}");
    assert!(text.contains("FAIL"));
}

#[test]
fn tangled_mesh_dumps_the_last_good_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{
  "profile": {
    "density": { "kind": "jump", "rho_bar": 1e-6 },
    "velocity": { "kind": "linear", "a": -50.0 }
  },
  "params": { "mu": 1.0, "lambda": 1.0, "gamma": 2.0 },
  "grid": { "n_cells": 16 },
  "stepping": { "dt_init": 0.1, "t_end": 1.0 }
}"#,
    );
    let out = dir.path().join("out");
    let (code, stdout, _) = call(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, EXIT_RUNTIME, "{stdout}");
    assert!(stdout.contains("status: failed"));
    let text = std::fs::read_to_string(out.join("snapshots/000000.json")).unwrap();
    assert!(text.contains("\"last_good_before_failure\""));
    let snap = read_snapshot(&out.join("snapshots/000000.json")).unwrap();
    assert!(snap.failure.is_some());
    assert_eq!(snap.t, 0.0);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        &jump(1.0, "").replace("\"gamma\": 2.0", "\"gamma\": 1.0"),
    );
    let out = dir.path().join("out");
    let (code, _, err) = call(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("gamma"), "{err}");
    assert!(!out.join("series.csv").exists());
}

#[test]
fn mms_csv_lists_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rates.csv");
    let (code, out, err) = call(&["mms", "--csv", s(&csv)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("spatial") && out.contains("temporal"), "{out}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sweep,n_cells,dt,scheme,linf_v,l2_v,linf_r,l2_r"
    );
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sphvac");
    let status = Command::new(bin).arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let status = Command::new(bin)
        .args(["energies", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&status.stderr).contains("/nonexistent.json"));
}

#[test]
fn sample_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sphvac::io::config::load_config(&path).unwrap();
        cfg.setup().unwrap();
        seen += 1;
    }
    assert!(seen >= 4);
}

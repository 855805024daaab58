//! End-to-end CLI checks: exit codes, file emission, validation messages.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qcurv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcurv"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn spectrum_prints_json() {
    let out = run(qcurv().args(["spectrum", "--n", "3", "--k", "1", "--lmax", "16"]));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["q_h"], 1.5);
    assert_eq!(v["factors"][0], 0.75);
    assert_eq!(v["eigenvalues_head"][2], 8.75);
}

#[test]
fn spectrum_rejects_bad_dimensions_with_exit_2() {
    let out = run(qcurv().args(["spectrum", "--n", "4", "--k", "2"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_emits_three_files_with_expected_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "round.json",
        r#"{ "n": 5, "k": 2, "l_max": 16, "group": "antipodal", "f": "13.125",
             "schedule": { "steps": 4, "blowup_cap": 10000.0 } }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(qcurv()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("table.csv")).unwrap();
    // header + schedule rows + the critical solve
    assert_eq!(table.lines().count(), 1 + 4 + 1);
    assert!(table.starts_with("q,mu_q,sup_norm,residual,iters\n"));
    let curves = std::fs::read_to_string(out_dir.join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 512);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "Converged");
}

#[test]
fn invalid_config_exits_2_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    // odd weight with the antipodal group violates G-invariance
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{ "n": 3, "k": 1, "l_max": 16, "group": "antipodal", "f": "1.5 + 0.3t" }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(qcurv()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("violates G-invariance"),
        "stderr: {stderr}"
    );
    assert!(!out_dir.exists(), "no partial outputs on config error");
}

#[test]
fn blowup_verdict_is_success_not_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tilt.json",
        r#"{ "n": 3, "k": 1, "l_max": 64, "group": "trivial", "f": "Q_h + 0.3t",
             "schedule": { "steps": 6, "blowup_cap": 1.0 },
             "solver": { "max_iter": 600 } }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(qcurv()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir));
    assert!(
        out.status.success(),
        "blow-up must exit 0: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "BlowUp");
    assert!(report["diagnostics"]["orbit_masses"].is_array());
}

#[test]
fn unresolvable_solve_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // starved iteration budget: first subcritical solve cannot converge and
    // there is no sup-norm growth to blame
    let cfg = write_config(
        dir.path(),
        "starved.json",
        r#"{ "n": 3, "k": 1, "l_max": 16, "group": "antipodal", "f": "1.5 + t^2",
             "schedule": { "steps": 2, "blowup_cap": 10000.0 },
             "solver": { "tol": 1e-9, "max_iter": 3 } }"#,
    );
    let out = run(qcurv().arg("solve").arg("--config").arg(&cfg));
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no convergence"), "stderr: {stderr}");
}

#[test]
fn threshold_and_obstruction_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tilt.json",
        r#"{ "n": 3, "k": 1, "l_max": 64, "group": "trivial", "f": "Q_h + 0.3t" }"#,
    );
    let out = run(qcurv().arg("threshold").arg("--config").arg(&cfg));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // argmin of the threshold sits at the maximizer of f (north pole)
    assert!(v["argmin_t"].as_f64().unwrap() > 0.99);

    let out = run(qcurv().arg("obstruction").arg("--config").arg(&cfg));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kw"]["interpretation"], "ObstructionSignal");
    assert!(v["kw"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn bubble_subcommand_reports_dual_route_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bub.json",
        r#"{ "n": 3, "k": 1, "l_max": 64, "group": "antipodal", "f": "1.5",
             "betas": [1.5, 2.0] }"#,
    );
    let out = run(qcurv().arg("bubble").arg("--config").arg(&cfg));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["sobolev_rel_gap"].as_f64().unwrap() < 1e-5);
    assert_eq!(v["probes"].as_array().unwrap().len(), 2);
    assert!(v["probes"][0]["equation_residual"].as_f64().unwrap() < 1e-8);
    assert!(v["interaction_constant_direct"].as_f64().unwrap() > 0.0);
}

#[test]
fn rerun_reproduces_report_except_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "round.json",
        r#"{ "n": 5, "k": 2, "l_max": 16, "group": "antipodal", "f": "13.125",
             "schedule": { "steps": 3, "blowup_cap": 10000.0 } }"#,
    );
    let mut texts = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run(qcurv()
            .arg("solve")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir));
        assert!(out.status.success());
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
                .unwrap();
        v.as_object_mut().unwrap().remove("timing");
        texts.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

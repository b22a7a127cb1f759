use std::path::Path;
use std::process::Command;

fn hamrep(dir: &Path, config: &str, extra: &[&str]) -> (i32, String, String) {
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hamrep"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn unknown_hamiltonian_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = hamrep(
        d.path(),
        r#"{"command": "check", "hamiltonian": "ex_9_9"}"#,
        &[],
    );
    assert_eq!(code, 1);
    assert!(err.contains("ex_9_9"), "{err}");
}

#[test]
fn bad_counts_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, _) = hamrep(
        d.path(),
        r#"{"command": "conjugate", "hamiltonian": "ex_2_1", "grids": {"v_count": 5}}"#,
        &[],
    );
    assert_eq!(code, 1);
}

#[test]
fn blc_verdict_is_not_a_failure() {
    let d = tempfile::tempdir().unwrap();
    let (code, stdout, _) = hamrep(
        d.path(),
        r#"{"command": "compactness", "hamiltonian": "ex_2_3", "seed": 3}"#,
        &[],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("BLC violated"), "{stdout}");
    let json = std::fs::read_to_string(d.path().join("out/compactness_ex_2_3_3.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["violated"], true);
    assert_eq!(v["schema"], 1);
}

#[test]
fn represent_writes_trace_and_report() {
    let d = tempfile::tempdir().unwrap();
    let (code, stdout, err) = hamrep(
        d.path(),
        r#"{"command": "represent", "hamiltonian": "ex_2_2", "samples": 16}"#,
        &["--seed", "5"],
    );
    assert_eq!(code, 0, "{stdout}{err}");
    let csv = std::fs::read_to_string(d.path().join("out/represent_ex_2_2_5.csv")).unwrap();
    assert!(csv.starts_with("t,x,a1,a2,f,l\n"));
    assert!(d.path().join("out/represent_ex_2_2_5.json").exists());
    assert!(d.path().join("out/represent_ex_2_2_5.meta.json").exists());
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn tolerance_override_flips_the_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "check", "hamiltonian": "ex_2_1", "samples": 16}"#;
    assert_eq!(hamrep(d.path(), cfg, &["--quiet"]).0, 0);
    let (code, stdout, _) = hamrep(d.path(), cfg, &["--tol", "mlc=1e-6", "--quiet"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
}

#[test]
fn zoo_list_prints_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_hamrep"))
        .args(["zoo", "list"])
        .output()
        .unwrap();
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    assert!(
        s.lines()
            .any(|l| l.starts_with("ex_2_5") && l.contains("growth=false")),
        "{s}"
    );
}

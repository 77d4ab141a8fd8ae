use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lvolterra"))
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.op"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = bin().args(args).output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn gen_then_fixed_points_lists_w1_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w1.op");
    let (code, _, _) = run(&["gen", "--named", "W1", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["fixed-points", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("vertex e(2) (0, 1, 0)"));
    assert!(out.contains("vertex e(3) (0, 0, 1)"));
    assert!(!out.contains("vertex e(1)"));
    assert!(out.contains("face-interior (1, 2, 3) (0.18181818181818"));
}

#[test]
fn classify_identity() {
    let (code, out, _) = run(&["classify", golden("identity").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("class: Volterra (ℓ=3)"));
}

#[test]
fn simulate_c1_reports_two_cycle() {
    let (code, out, _) = run(&["simulate", golden("C1").to_str().unwrap(), "--x0", "e2"]);
    assert_eq!(code, 0);
    assert!(out.contains("stop: cycle period=2"));
}

#[test]
fn every_command_prints_tolerances() {
    let g = golden("W1");
    let p = g.to_str().unwrap();
    for args in [
        vec!["validate", p],
        vec!["classify", p],
        vec!["canonical", p],
        vec!["simulate", p, "--steps", "5"],
        vec!["lyapunov", p, "--family", "linear", "--params", "1", "--steps", "5"],
        vec!["fixed-points", p],
        vec!["omega", p],
        vec!["ensemble", p, "--starts", "2", "--steps", "5"],
    ] {
        let (_, out, _) = run(&args);
        assert!(out.starts_with("# tol_simplex=1e-12 "), "{args:?}: {out}");
    }
    let (_, _, err) = run(&["gen", "--named", "T2"]);
    assert!(err.contains("tol_fixed=1e-10"));
}

#[test]
fn tolerance_environment_override() {
    let out = bin()
        .args(["validate", golden("W1").to_str().unwrap()])
        .env("LVOLTERRA_TOL_FIXED", "1e-9")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("tol_fixed=1e-9"));
    let bad = bin()
        .args(["validate", golden("W1").to_str().unwrap()])
        .env("LVOLTERRA_TOL_ZERO", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_rows = dir.path().join("bad.op");
    std::fs::write(
        &bad_rows,
        r#"{"format_version":"1","m":2,"entries":[{"i":1,"j":1,"k":1,"value":0.9},{"i":2,"j":2,"k":2,"value":1.0},{"i":1,"j":2,"k":1,"value":0.5},{"i":1,"j":2,"k":2,"value":0.5}]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["validate", bad_rows.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("valid: false"));

    let broken = dir.path().join("broken.op");
    std::fs::write(&broken, "{\n  \"format_version\": \"1\",\n  \"m\": 3,\n  oops\n}").unwrap();
    let (code, _, err) = run(&["validate", broken.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");

    let (code, _, _) = run(&["simulate", golden("W1").to_str().unwrap(), "--x0", "0.5,0.6,0.1"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn non_ell_volterra_is_a_domain_finding() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("perm.op");
    // coordinate 1 is non-Volterra while 2 is Volterra: needs relabeling
    std::fs::write(
        &path,
        r#"{"format_version":"1","m":2,"entries":[{"i":1,"j":1,"k":1,"value":1.0},{"i":1,"j":2,"k":1,"value":0.5},{"i":1,"j":2,"k":2,"value":0.5},{"i":2,"j":2,"k":1,"value":0.5},{"i":2,"j":2,"k":2,"value":0.5}]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("NotEllVolterra"));
    assert!(out.contains("suggested_relabeling: [2, 1]"));
}

#[test]
fn simulate_writes_csv_and_ternary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let tern = dir.path().join("orbit_uv.csv");
    let (code, _, _) = run(&[
        "simulate",
        golden("W1").to_str().unwrap(),
        "--steps",
        "3",
        "--out",
        csv.to_str().unwrap(),
        "--ternary",
        tern.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,x_1,x_2,x_3");
    assert_eq!(text.lines().count(), 5);
    let uv = std::fs::read_to_string(&tern).unwrap();
    assert_eq!(uv.lines().next().unwrap(), "step,u,v");
}

#[test]
fn lyapunov_and_omega_commands() {
    let (code, out, _) = run(&["lyapunov", golden("T5").to_str().unwrap(), "--family", "phi", "--steps", "50"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("monotone: true"));
    let (code, out, _) = run(&["lyapunov", golden("C1").to_str().unwrap(), "--family", "ratio"]);
    assert_eq!(code, 1);
    assert!(out.contains("hypothesis"));
    let (code, out, _) = run(&["omega", golden("C1").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("zero_coordinates: []"));
}

#[test]
fn gen_random_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.op");
    let (code, _, _) = run(&["gen", "--m", "5", "--ell", "2", "--seed", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("EllVolterra (ℓ=2)"));
    let (code, _, _) = run(&["gen", "--m", "3", "--ell", "7"]);
    assert_eq!(code, 2);
}

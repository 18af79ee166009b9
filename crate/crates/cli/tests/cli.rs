use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orlicz-lab"))
}

#[test]
fn lists_every_suite() {
    let out = lab().arg("list-suites").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l == "strauss"));
}

#[test]
fn run_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = lab()
        .args(["run", "young-axioms", "--young", "power:p=2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["suite"], "young-axioms");
    assert_eq!(report["pass"], true);
    assert!(report["summary"]["max_ratio"].is_number());
    let csv = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(csv.starts_with("case,resolution,lhs,rhs,ratio"));
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad_pair = lab()
        .args(["run", "embedding-s1", "--s", "0.6", "--s2", "0.4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(bad_pair.code(), Some(2));
    let unknown = lab().args(["run", "nothing", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(unknown.code(), Some(2));
    let bad_family = lab().args(["run", "atoms", "--family", "waves:3", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(bad_family.code(), Some(2));
    let guarded = lab().args(["run", "increment-kernel", "--grid", "256", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(guarded.code(), Some(3));
}

#[test]
fn failing_checks_exit_with_one() {
    // Below the hypothesis s p_minus > 1 the decay suite reports a failure.
    let dir = tempfile::tempdir().unwrap();
    let status = lab()
        .args(["run", "strauss", "--n", "2", "--grid", "64", "--s", "0.4", "--family", "radial-gaussians:2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn kernel_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let status = lab()
        .args(["kernel", "--s", "2", "--grid", "256", "--extent", "16", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let field = orlicz_core::Field::read(&path).unwrap();
    assert_eq!(field.grid().size, 256);
    assert!((field.integrate() - 1.0).abs() < 1e-6);
    let zero = lab().args(["kernel", "--s", "0", "--out"]).arg(&path).status().unwrap();
    assert_eq!(zero.code(), Some(2));
}

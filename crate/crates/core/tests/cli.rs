//! The `dqcheck` binary on the golden circuit files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqcheck"))
        .args(args)
        .env_remove("DQCHECK_EPS")
        .output()
        .expect("binary runs")
}

fn check(a: &str, b: &str, extra: &[&str]) -> (i32, serde_json::Value) {
    let (pa, pb) = (golden(a), golden(b));
    let mut args = vec!["check", pa.to_str().unwrap(), pb.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(stdout.trim()).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), json)
}

#[test]
fn qft_4_is_m_equivalent() {
    let (code, r) = check("qft_4.qc", "dyn_qft_4.qc", &["--mode", "m"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "Equivalent");
    assert_eq!(r["nodes"], 31);
    for key in ["benchmark", "mode", "plan", "tdd_time", "time", "m_nodes"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn teleport_is_q_equivalent_under_both_plans() {
    for plan in ["basic", "partitioned"] {
        let (code, _) = check(
            "swap_teleport.qc",
            "teleport.qc",
            &["--mode", "q", "--plan", plan],
        );
        assert_eq!(code, 0, "{plan}");
    }
    let (code, r) = check("swap_teleport.qc", "teleport.qc", &["--mode", "full"]);
    assert_eq!(code, 0);
    assert_eq!(r["mode"], "full");
}

#[test]
fn mutation_exits_one_with_witness() {
    let (code, r) = check("swap_teleport.qc", "teleport_no_z.qc", &["--mode", "q"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], "NotEquivalent");
    assert!(r["witness"].is_object());
    let (code, _) = check("swap_teleport.qc", "teleport_no_z.qc", &["--mode", "full"]);
    assert_eq!(code, 1);
}

#[test]
fn errors_exit_two() {
    // mode mismatch: teleportation has no output bits
    let (code, r) = check("swap_teleport.qc", "teleport.qc", &["--mode", "m"]);
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "Inconclusive");
    let out = run(&[
        "check",
        "/nonexistent.qc",
        golden("qft_3.qc").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonexistent"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qc");
    std::fs::write(&bad, "qubits a\ninit a=0\ngate cx a b\n").unwrap();
    let out = run(&["check", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn eps_comes_from_the_environment() {
    let (pa, pb) = (golden("qft_3.qc"), golden("dyn_qft_3.qc"));
    let out = Command::new(env!("CARGO_BIN_EXE_dqcheck"))
        .args(["check", pa.to_str().unwrap(), pb.to_str().unwrap()])
        .env("DQCHECK_EPS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_suites() {
    let out = run(&["bench", "--suite", "qec", "--plan", "basic", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let names: Vec<&str> = rows
        .iter()
        .map(|r| r["benchmark"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "Bitflip",
            "Phaseflip",
            "Teleportation",
            "State_inject_S",
            "State_inject_T"
        ]
    );
    assert!(rows.iter().all(|r| r["verdict"] == "Equivalent"));

    let out = run(&[
        "bench",
        "--suite",
        "qft",
        "--max-n",
        "8",
        "--plan",
        "partitioned",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 7, "{text}");

    let out = run(&["bench", "--suite", "qft", "--max-n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bench"]);
    assert_eq!(out.status.code(), Some(2));
}

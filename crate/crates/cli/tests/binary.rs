use std::process::Command;

fn tripsum(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tripsum")).args(args).output().expect("binary runs")
}

#[test]
fn exit_codes_reach_the_shell() {
    assert_eq!(tripsum(&["--help"]).status.code(), Some(0));
    assert_eq!(tripsum(&["verify", "--suite", ""]).status.code(), Some(2));
    assert_eq!(tripsum(&["property-density", "--n", "4", "--seed", "1"]).status.code(), Some(1));
}

#[test]
fn report_on_stdout_and_lines_on_stderr() {
    let out = tripsum(&["verify", "--suite", "operators", "--quick"]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["command"], "verify");
    assert!(String::from_utf8_lossy(&out.stderr).contains("psi_norm_sqrt3: pass"));
}

#[test]
fn small_modulus_warns() {
    let out = tripsum(&["certify", "--variant", "shift", "--n", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

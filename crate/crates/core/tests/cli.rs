use std::path::PathBuf;
use std::process::{Command, Output};

fn rmcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmcap")).args(args).output().expect("spawn rmcap")
}

fn golden(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read(path).unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_profile_matches_golden() {
    let out = rmcap(&["capability", "exact", "--n", "3", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, golden("exact_n3_r1.csv"));
    assert!(String::from_utf8(out.stdout).unwrap().contains("\n2,28,7,7,28\n"));
}

#[test]
fn sweep_matches_golden_for_any_thread_count() {
    let args = ["capability", "sweep", "--n", "6", "--r", "1", "--c", "0.5,1,1.5", "--trials", "300"];
    let expected = golden("sweep_n6_r1.csv");
    for threads in ["1", "3", "8"] {
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        assert_eq!(rmcap(&a).stdout, expected, "threads = {threads}");
    }
}

#[test]
fn code_info_json() {
    let v = stdout_json(&rmcap(&["code", "info", "--n", "4", "--r", "2"]));
    assert_eq!(v["k"], 11);
    assert_eq!(v["d_min"], 4);
}

#[test]
fn bounds_eval_delta() {
    let v = stdout_json(&rmcap(&["bounds", "eval", "--n", "3", "--r", "1", "--c", "1"]));
    assert!((v["delta"].as_f64().unwrap() - 1.1159).abs() < 1e-4);
}

#[test]
fn out_flag_writes_file_with_seed() {
    let dir = std::env::temp_dir().join(format!("rmcap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mc.csv");
    let out = rmcap(&[
        "capability", "mc", "--n", "4", "--r", "1", "--t", "3", "--trials", "200", "--seed", "99", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",99"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(rmcap(&["nope"]).status.code(), Some(1));
    assert_eq!(rmcap(&["code", "info", "--n", "40", "--r", "2"]).status.code(), Some(2));
    assert_eq!(rmcap(&["code", "info", "--n", "3", "--r", "4"]).status.code(), Some(2));
    assert_eq!(rmcap(&["capability", "exact", "--n", "5", "--r", "1"]).status.code(), Some(3));
    assert_eq!(rmcap(&["capability", "mc", "--n", "4", "--r", "1", "--t", "3", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(rmcap(&["--help"]).status.code(), Some(0));
}

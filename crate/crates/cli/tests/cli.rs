use std::process::{Command, Output};

fn isalsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isalsr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn canon_prints_the_anchor_string() {
    let o = isalsr(&["canon", "VsVcpv+Ppc"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("VcVspv+Ppc"));
}

#[test]
fn canon_exit_codes() {
    let o = isalsr(&["canon", "NVkNC", "--vars", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = isalsr(&["canon", "NVkNC", "--vars", "2", "--strip-var-inputs"]);
    assert!(o.status.success());
    let o = isalsr(&["canon", "VsVcpv+Ppc", "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let o = isalsr(&["gen", "dag", "--k", "4", "--m", "2", "--sample", "3"]);
    std::fs::write(&path, &o.stdout).unwrap();
    let p = path.to_str().unwrap();
    assert!(stdout(&isalsr(&["roundtrip", p])).starts_with("PASS"));
    assert!(isalsr(&["iso", p, p]).status.success());
    let greedy = stdout(&isalsr(&["encode", p]));
    assert!(!greedy.trim().is_empty());
}

#[test]
fn metric_distance() {
    let o = isalsr(&["metric", "dist", "Ve", "Vl"]);
    assert_eq!(stdout(&o).lines().next(), Some("1"));
}

#[test]
fn seed_comes_from_the_environment() {
    let a = Command::new(env!("CARGO_BIN_EXE_isalsr"))
        .args(["gen", "dag", "--k", "5", "--m", "1"])
        .env("ISALSR_SEED", "7")
        .output()
        .unwrap();
    let b = isalsr(&["gen", "dag", "--k", "5", "--m", "1", "--seed", "7"]);
    let c = isalsr(&["gen", "dag", "--k", "5", "--m", "1"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn experiment_writes_reports_and_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = isalsr(&["exp", "shortest-path", "--out", out]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("shortest_path.csv")).unwrap();
    assert!(csv.starts_with("pair,expr1,expr2,canonical1,canonical2,distance"));
    let o = isalsr(&["exp", "shortest-path", "--out", out, "--format", "json"]);
    assert!(o.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("shortest_path.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["report"]["rows"][1]["distance"], 1);
}

#[test]
fn bench_data_csv() {
    let o = isalsr(&["bench", "data", "Nguyen-10", "--split", "test"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("x0,x1,y"));
    assert_eq!(text.lines().count(), 101);
}

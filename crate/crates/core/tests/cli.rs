use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lepsched"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_instance_reproduces_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, file) in [("base", "base_case.json"), ("t1", "t1.json"), ("reduced", "reduced.json")] {
        let o = run(dir.path(), &["--seed", "7", "gen-instance", "--kind", kind]);
        assert!(o.status.success());
        assert_eq!(fs::read(dir.path().join(file)).unwrap(), fs::read(fixture(file)).unwrap(), "{file}");
    }
}

#[test]
fn exact_on_base_case_hits_size_guard() {
    let dir = tempfile::tempdir().unwrap();
    let base = fixture("base_case.json");
    let o = run(dir.path(), &["--instance", path(&base), "solve-exact"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
}

#[test]
fn compare_on_t1_finds_the_same_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = fixture("t1.json");
    let o = run(dir.path(), &["--instance", path(&t1), "compare", "--count", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let mean: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(mean, 20.0);
    }
}

#[test]
fn tabu_solution_passes_check_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = fixture("base_case.json");
    let args = ["--instance", path(&base), "solve-ts", "--iterations", "20", "--fitness-scenarios", "10"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    for f in ["trace.csv", "solution.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let sol = a.path().join("solution.json");
    let o = run(a.path(), &["--instance", path(&base), "check", "--solution", path(&sol)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 violations"));
    assert_eq!(fs::read_to_string(a.path().join("violations.csv")).unwrap().lines().count(), 1);
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_slice(&fs::read(fixture("t1.json")).unwrap()).unwrap();
    v["interpreters"][1]["fixed_cost"] = serde_json::json!("cheap");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(dir.path(), &["--instance", path(&bad), "solve-ts"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("interpreters[1]"), "{err}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
}

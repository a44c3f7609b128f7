use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spr"))
        .args(args)
        .output()
        .expect("run spr")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn solve_path3(dir: &Path) {
    let o = spr(&[
        "solve",
        "--input",
        fixture("path3.graph").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn solve_path3_writes_exact_minor() {
    let dir = tempfile::tempdir().unwrap();
    solve_path3(dir.path());
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["alpha"], 1.0);
    let minor = json(&dir.path().join("minor.json"));
    assert_eq!(minor["edges"][0]["weight"], 2.0);
    assert_eq!(minor["terminals"], serde_json::json!(["a", "c"]));
    for f in ["branch_sets.json", "trace.json", "manifest.json", "timing.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graph");
    fs::write(&bad, "3 2 2\na b 1\nb c heavy\na\nc\n").unwrap();
    let o = spr(&["solve", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = spr(&["solve", "--input", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(spr(&["solve"]).status.code(), Some(1));
    assert_eq!(spr(&["solve", "--gen", "hexgrid:3"]).status.code(), Some(1));
    assert_eq!(spr(&["solve", "--gen", "path:3", "--c", "0.5"]).status.code(), Some(1));
    assert_eq!(spr(&["solve", "--gen", "path:3", "--provider", "nope"]).status.code(), Some(1));
    assert_eq!(spr(&["solve", "--gen", "path:3", "--terminals", "random:9"]).status.code(), Some(1));
    assert_eq!(spr(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_after_solve_passes() {
    let dir = tempfile::tempdir().unwrap();
    solve_path3(dir.path());
    let out = dir.path().join("check");
    let o = spr(&[
        "verify",
        "--input",
        fixture("path3.graph").to_str().unwrap(),
        "--artifacts",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&out.join("verification.json"));
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "reproducible"));
}

#[test]
fn verify_rejects_tampered_branch_sets() {
    let dir = tempfile::tempdir().unwrap();
    solve_path3(dir.path());
    let path = dir.path().join("branch_sets.json");
    let mut sets = json(&path);
    // Hand b to terminal c and drop it from a.
    sets["branch_sets"][0]["vertices"] = serde_json::json!(["a"]);
    sets["branch_sets"][1]["vertices"] = serde_json::json!(["c", "a"]);
    fs::write(&path, sets.to_string()).unwrap();
    let o = spr(&[
        "verify",
        "--input",
        fixture("path3.graph").to_str().unwrap(),
        "--artifacts",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("minor-valid"), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn verify_rejects_tampered_weights() {
    let dir = tempfile::tempdir().unwrap();
    solve_path3(dir.path());
    let path = dir.path().join("minor.json");
    let mut minor = json(&path);
    minor["edges"][0]["weight"] = serde_json::json!(1.0);
    fs::write(&path, minor.to_string()).unwrap();
    let o = spr(&[
        "verify",
        "--input",
        fixture("path3.graph").to_str().unwrap(),
        "--artifacts",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"non-contraction"), "{failed:?}");
    assert!(failed.contains(&"minor-valid"), "{failed:?}");
}

#[test]
fn grid_solve_matches_snapshot_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = spr(&[
            "solve",
            "--gen",
            "grid:10x10",
            "--terminals",
            "random:8",
            "--seed",
            "1",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["minor.json", "branch_sets.json", "trace.json", "report.json", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read_to_string(a.path().join("report.json")).unwrap(),
        fs::read_to_string(fixture("grid10_random8_seed1.report.json")).unwrap()
    );
}

#[test]
fn verify_sampled_on_large_instance() {
    let o = spr(&[
        "verify",
        "--gen",
        "random-planar:5000",
        "--pairs",
        "sample:1000",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

fn bench_rows(args: &[&str]) -> Vec<csv::StringRecord> {
    let o = spr(args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = r.headers().unwrap().clone();
    assert_eq!((&headers[2], &headers[3], &headers[4]), ("n", "m", "k"));
    r.records().map(Result::unwrap).collect()
}

#[test]
fn bench_grid_sweep() {
    let rows = bench_rows(&["bench", "--family", "grid", "--sweep", "5..50:15", "--jobs", "2"]);
    let ns: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(ns, vec![25, 400, 1225, 2500]);
    for r in &rows {
        assert!(r[7].parse::<f64>().unwrap() >= 1.0);
    }
}

#[test]
fn bench_tree_sweep() {
    let rows = bench_rows(&["bench", "--family", "tree", "--sweep", "10,100,300", "--repeats", "2"]);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[7].parse::<f64>().unwrap().is_finite());
    }
    assert_eq!(
        spr(&["bench", "--family", "tree", "--sweep", "9..3"]).status.code(),
        Some(1)
    );
}

#[test]
fn gen_output_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("star.graph");
    let o = spr(&["gen", "--gen", "star:3", "--terminals", "leaves", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&file).unwrap(), "4 3 3\n0 1 1\n0 2 1\n0 3 1\n1\n2\n3\n");
    let o = spr(&["solve", "--input", file.to_str().unwrap(), "--strict"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

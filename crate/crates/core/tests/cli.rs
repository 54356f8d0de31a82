use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(args)
        .env_remove("BERGMAN_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn coeffs_table() {
    let out = run(&["coeffs", "--N", "2", "--alpha", "0", "--dim", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0]["shift_coeff"], 1.0 / 3.0);
    assert_eq!(rows[1]["shift_coeff"], 0.5);
    assert_eq!(rows[0]["lower_bound"], 1.0 / 9.0);
}

#[test]
fn exact_weights_are_printed_as_fractions() {
    let out = run(&["weights", "--alpha", "1/1", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<&str> = text.lines().map(|l| l.split_whitespace().last().unwrap()).collect();
    assert_eq!(last, ["1", "1/3", "1/6"]);
}

#[test]
fn exact_beurling_report_schema() {
    let out = run(&[
        "beurling", "--N", "2", "--alpha", "1/2", "--dim", "24", "--residues", "0", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["entries", "suite_version", "summary"]);
    let e = &v["entries"][0];
    let mut keys: Vec<&str> = e.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["name", "params", "pass", "residual", "tol", "wall_ms"]);
    assert_eq!(e["name"], "beurling");
    assert_eq!(
        e["params"],
        serde_json::json!({"N": 2, "alpha": "1/2", "D": 24, "residues": [0], "depth": 4, "seed": 1, "mode": "exact"})
    );
    assert_eq!(e["residual"], 0.0);
    assert_eq!(v["summary"], serde_json::json!({"total": 1, "passed": 1, "failed": 0}));
}

#[test]
fn verify_writes_csv_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = run(&[
        "verify", "--N", "3", "--alpha", "2.5", "--dim", "16", "--residues", "0,2", "--depth", "2", "--format",
        "csv", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["name", "N", "alpha", "D", "residues", "depth", "seed", "mode", "residual", "tol", "pass", "wall_ms"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| &r[4] == "0,2" && &r[10] == "true"));
}

#[test]
fn failing_check_exits_one() {
    let out = run(&["verify", "--alpha", "0", "--dim", "16", "--check", "norm_identity", "--perturb", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL norm_identity"));
}

#[test]
fn census_reports_residue_and_random_subspaces() {
    let out = run(&["census", "--N", "2", "--alpha", "1", "--dim", "12", "--trials", "10", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["residue_total"], 4);
    assert_eq!(v["residue_passed"], 4);
    assert_eq!(v["random_failed"], 10);
    assert_eq!(v["pass"], true);
}

#[test]
fn usage_errors_name_the_flag() {
    let out = run(&["coeffs", "--alpha", "-3/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--alpha"));

    let out = run(&["coeffs", "--N", "4", "--dim", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dim"));

    let out = run(&["suite", "--grid", "huge"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--grid"));

    let out = run(&["verify", "--check", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(["coeffs", "--dim", "4"])
        .env("BERGMAN_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("BERGMAN_LAB_THREADS"));
}

//! End-to-end checks of the `shift-index` binary: exit-status contract,
//! report emission, and determinism of the verification reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_shift-index")
}

fn suites_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suites")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shift-index-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn verify(suite: &Path, out: &Path, seed: u64) -> Output {
    run(&[
        "verify",
        suite.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
    ])
}

#[test]
fn passing_suite_exits_zero_and_emits_reports() {
    let out = tmp_dir("pass");
    let output = verify(&suites_dir().join("classical.json"), &out, 0);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("classical: PASS"), "{stdout}");

    let csv = std::fs::read_to_string(out.join("classical-report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 8); // header + 7 windings
    assert!(lines[0].starts_with("name,analytic,topological_raw"));

    let json = std::fs::read_to_string(out.join("classical-report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["all_pass"], serde_json::Value::Bool(true));
    assert_eq!(report["results"].as_array().unwrap().len(), 7);
}

#[test]
fn failing_suite_exits_one() {
    let out = tmp_dir("fail");
    let suite = out.join("wrong.json");
    std::fs::write(
        &suite,
        r#"{
  "name": "wrong",
  "scenarios": [
    {
      "name": "winding-1-misexpected",
      "kind": "toeplitz",
      "manifold": "circle",
      "group": { "law": { "type": "trivial" } },
      "terms": [{ "g": [], "plus": [{ "k": 1, "re": 1.0 }] }],
      "truncations": [16, 32, 64],
      "expected": { "index": 5, "note": "deliberately wrong" }
    }
  ]
}"#,
    )
    .unwrap();
    let output = verify(&suite, &out, 0);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("wrong: FAIL"), "{stdout}");
}

#[test]
fn malformed_suite_exits_two() {
    let out = tmp_dir("malformed");
    let suite = out.join("broken.json");
    std::fs::write(&suite, "{ \"name\": \"broken\", \"scenarios\": [ {").unwrap();
    let output = verify(&suite, &out, 0);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(!output.stderr.is_empty());
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let out_a = tmp_dir("det-a");
    let out_b = tmp_dir("det-b");
    let suite = suites_dir().join("classical.json");
    assert_eq!(verify(&suite, &out_a, 7).status.code(), Some(0));
    assert_eq!(verify(&suite, &out_b, 7).status.code(), Some(0));
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("classical-report.json")).unwrap())
            .unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_b.join("classical-report.json")).unwrap())
            .unwrap();
    for v in [&mut a, &mut b] {
        for r in v["results"].as_array_mut().unwrap() {
            r["runtime_ms"] = serde_json::json!(0);
        }
        v["runtime_ms"] = serde_json::json!(0);
    }
    assert_eq!(a, b);
}

#[test]
fn model_euler_subcommand_reports_index_one() {
    let output = run(&["model-euler", "--truncations", "16,32"]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("index=1"), "{stdout}");
}

#[test]
fn check_group_golden_reports_diophantine_fit() {
    let output = run(&[
        "check-group",
        "--manifold",
        "circle",
        "--law",
        "free:1",
        "--angle",
        "golden",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.to_lowercase().contains("fit"), "{stdout}");
}

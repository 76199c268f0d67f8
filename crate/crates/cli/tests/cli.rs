use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn lcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scripted(name: &str, test: &str) -> Value {
    let g = fixture(&format!("{name}.json"));
    let o = fixture(&format!("{name}.overrides.json"));
    let out = lcd(&[
        "faithfulness", "--test", test, "--ci", "scripted", "--graph", path(&g), "--overrides", path(&o),
    ]);
    assert_eq!(out.status.code(), Some(0));
    json(&out)
}

#[test]
fn discover_on_fig1_finds_the_single_adjustment_set() {
    let g = fixture("fig1.json");
    let out = lcd(&["discover", "--algo", "ldecc", "--ci", "oracle", "--graph", path(&g), "-x", "X", "-y", "Y"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "lcd/1");
    assert_eq!(v["discovery"]["parents"], serde_json::json!(["W"]));
    assert_eq!(v["discovery"]["children"], serde_json::json!(["M"]));
    let entries = v["ate"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["set"], serde_json::json!(["W"]));
}

#[test]
fn combined_reports_ldecc_winning_on_the_clique_family() {
    let g = fixture("fig5a.json");
    let v = json(&lcd(&["discover", "--algo", "combined", "--graph", path(&g)]));
    assert_eq!(v["winner"], "ldecc");
}

#[test]
fn test_cap_gives_partial_output_and_exit_code_three() {
    let g = fixture("fig5b.json");
    let out = lcd(&["discover", "--algo", "pc", "--graph", path(&g), "--test-cap", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["discovery"]["capped"], true);
    assert_eq!(v["discovery"]["tests"], 10);
    assert!(v["ate"]["entries"].as_array().unwrap().is_empty());
}

#[test]
fn trace_lists_every_evaluated_query() {
    let g = fixture("fig1.json");
    let v = json(&lcd(&["discover", "--algo", "sd", "--graph", path(&g), "--trace"]));
    let tests = v["discovery"]["tests"].as_u64().unwrap();
    assert_eq!(v["discovery"]["trace"].as_array().unwrap().len() as u64, tests);
}

#[test]
fn input_errors_exit_with_code_two() {
    let g = fixture("fig1.json");
    assert_eq!(lcd(&["discover", "--graph", path(&g), "-x", "Nope"]).status.code(), Some(2));
    assert_eq!(lcd(&["discover", "--graph", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(lcd(&["discover", "--ci", "fisher-z", "--graph", path(&g)]).status.code(), Some(2));
    assert_eq!(lcd(&["discover", "--ci", "scripted", "--graph", path(&g)]).status.code(), Some(2));
    assert_eq!(lcd(&["discover", "--algo", "bogus", "--graph", path(&g)]).status.code(), Some(2));
}

#[test]
fn engine_errors_exit_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.csv");
    let g = fixture("fig1.json");
    let out = lcd(&["sample", "--graph", path(&g), "-n", "4", "--out", path(&data)]);
    assert_eq!(out.status.code(), Some(0));
    let out = lcd(&["discover", "--ci", "fisher-z", "--data", path(&data)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fisher_z_recovers_the_fig1_parent_from_samples() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fig1.csv");
    let g = fixture("fig1.json");
    lcd(&["sample", "--graph", path(&g), "-n", "20000", "--seed", "9", "--out", path(&data)]);
    let v = json(&lcd(&["discover", "--ci", "fisher-z", "--data", path(&data), "--algo", "ldecc"]));
    assert_eq!(v["discovery"]["parents"], serde_json::json!(["W"]));
    let oracle = json(&lcd(&["discover", "--graph", path(&g)]));
    let est = v["ate"]["entries"][0]["theta"].as_f64().unwrap();
    let truth = oracle["ate"]["entries"][0]["theta"].as_f64().unwrap();
    assert!((est - truth).abs() < 0.05, "{est} vs {truth}");
}

#[test]
fn faithfulness_testers_on_the_scripted_fixtures() {
    assert_eq!(scripted("example18", "mff")["fail"], true);
    assert_eq!(scripted("example19", "mff")["fail"], true);
    assert_eq!(scripted("example21", "sd")["fail"], true);
    let g = fixture("fig1.json");
    for test in ["mff", "sd"] {
        let v = json(&lcd(&["faithfulness", "--test", test, "--graph", path(&g)]));
        assert_eq!(v["fail"], false);
    }
}

#[test]
fn hybrid_switches_when_the_sd_tester_fails() {
    let v = scripted("example21", "hybrid");
    assert_eq!(v["switched"], true);
    assert_eq!(v["ate"]["source"], "ldecc");
}

#[test]
fn adjust_reports_optimal_set_and_checks_a_candidate() {
    let g = fixture("fig1.json");
    let v = json(&lcd(&["adjust", "--graph", path(&g), "--set", "M"]));
    assert_eq!(v["optimal"]["set"], serde_json::json!(["W"]));
    assert_eq!(v["check"]["valid"], false);
    let v = json(&lcd(&["adjust", "--graph", path(&g), "--set", "W"]));
    assert_eq!(v["check"]["valid"], true);
}

#[test]
fn generate_then_sample_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let d = dir.path().join("d.csv");
    let out = lcd(&["generate", "--kind", "erdos-renyi", "--nodes", "6", "--seed", "4", "--out", path(&g)]);
    assert_eq!(out.status.code(), Some(0));
    let graph: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 6);
    assert!(graph["noise_var"].is_object());
    lcd(&["sample", "--graph", path(&g), "-n", "50", "--out", path(&d)]);
    let text = std::fs::read_to_string(&d).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text.lines().next().unwrap(), "V1,V2,V3,V4,V5,V6");
}

#[test]
fn generate_is_deterministic_in_the_seed() {
    let args = ["generate", "--kind", "cov-med", "--seed", "11"];
    assert_eq!(lcd(&args).stdout, lcd(&args).stdout);
    let other = lcd(&["generate", "--kind", "cov-med", "--seed", "12"]);
    assert_ne!(lcd(&args).stdout, other.stdout);
}

#[test]
fn bench_is_byte_identical_and_writes_csv_and_json() {
    let suite = fixture("suite-oracle.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = lcd(&["bench", "--suite", path(&suite), "--out", path(dir.path())]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["records.csv", "report.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between runs");
    }
    let csv = std::fs::read_to_string(a.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("graph_id,seed,algorithm,"));
    // 7 graphs x 6 algorithms plus the header.
    assert_eq!(csv.lines().count(), 43);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    for r in report["records"].as_array().unwrap() {
        assert!(r["error"].is_null());
        if r["graph_id"].as_str().unwrap().starts_with("fig5b") && r["algorithm"] == "combined" {
            assert_eq!(r["winner"], "sd");
        }
    }
}

#[test]
fn empty_suite_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("empty.json");
    std::fs::write(&suite, "{}").unwrap();
    let out = lcd(&["bench", "--suite", path(&suite)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["records"].as_array().unwrap().is_empty());
}

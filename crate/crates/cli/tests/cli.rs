use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn convdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convdiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_writes_known_corner_values() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(dir.path(), &["build", "--eps", "0.5", "--n", "4", "--out", "m"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("m/A.csv")).unwrap();
    assert!(text.starts_with("# config: {"));
    let rows: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("index,")).skip(1).collect();
    assert_eq!(rows.len(), 4);
    // first row has no sub entry; super is ε·1·2/2
    assert_eq!(rows[0], "1,,1,0.5");
    // last row: sub -ε·3·4/2 = -3, diag 4, no super
    assert_eq!(rows[3], "4,-3,4,");
    for m in ["B", "C", "J", "M"] {
        assert!(dir.path().join(format!("m/{m}.csv")).exists());
    }
}

#[test]
fn build_json_at_large_order() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(dir.path(), &["build", "--n", "500", "--format", "json", "--out", "m"]);
    assert_eq!(code(&out), 0);
    let doc = read_json(&dir.path().join("m/A.json"));
    assert_eq!(doc["config"]["n"], 500);
    assert_eq!(doc["results"]["diag"].as_array().unwrap().len(), 500);
    assert_eq!(doc["results"]["diag"][499], 500.0);
}

#[test]
fn epsilon_out_of_range_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&convdiff(dir.path(), &["build", "--eps", "3.0"])), 1);
    assert_eq!(code(&convdiff(dir.path(), &["build", "--eps", "0"])), 1);
    let out = convdiff(dir.path(), &["build", "--eps", "3.0", "--allow-eps-out-of-range", "--out", "m"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn unknown_flag_and_bad_method_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&convdiff(dir.path(), &["build", "--bogus"])), 1);
    assert_eq!(code(&convdiff(dir.path(), &["evolve", "--method", "rk4"])), 1);
    assert_eq!(code(&convdiff(dir.path(), &["verify", "--tol", "nope=1e-3"])), 1);
    assert_eq!(code(&convdiff(dir.path(), &["--help"])), 0);
}

#[test]
fn verify_passes_and_detects_an_injected_fault() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(dir.path(), &["verify", "--format", "json", "--out", "v"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let doc = read_json(&dir.path().join("v/verify.json"));
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 7);
    assert!(checks.iter().all(|c| c["passed"] == true));

    let out = convdiff(dir.path(), &["verify", "--inject-fault", "--out", "f"]);
    assert_eq!(code(&out), 2);
    let text = std::fs::read_to_string(dir.path().join("f/verify.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("factorization,fail")));
}

#[test]
fn resolve_recovers_cos_x() {
    let dir = TempDir::new().unwrap();
    for eps in ["0.5", "1.0", "1.5"] {
        let out = convdiff(dir.path(), &["resolve", "--phi", "builtin:cosx-image", "--eps", eps, "--out", "r"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let report = read_json(&dir.path().join("r/report.json"));
        let err = report["results"]["max_error_vs_exact"].as_f64().unwrap();
        assert!(err <= 1e-6, "eps {eps}: {err}");
        assert!(dir.path().join("r/solution.csv").exists());
    }
}

#[test]
fn resolve_from_file_and_failures() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("phi.csv"), "n,re,im\n-1,0,0.5\n0,0,0\n1,0,-0.5\n").unwrap();
    let out = convdiff(dir.path(), &["resolve", "--phi", "phi.csv", "--out", "r"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&convdiff(dir.path(), &["resolve", "--phi", "builtin:one"])), 2);
    assert_eq!(code(&convdiff(dir.path(), &["resolve", "--phi", "missing.csv"])), 3);
}

#[test]
fn norms_has_no_violations() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(dir.path(), &["norms", "--samples", "100", "--eps", "1.5", "--out", "n"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = std::fs::read_to_string(dir.path().join("n/norms.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 100);
}

#[test]
fn evolve_writes_a_trace() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(
        dir.path(),
        &["evolve", "--n", "8", "--times", "0.1,0.2", "--method", "scaling_squaring", "--format", "json", "--out", "e"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("e/trace.json"));
    assert_eq!(doc["results"]["times"], serde_json::json!([0.0, 0.1, 0.2]));
    assert_eq!(doc["config"]["params"]["method"], "scaling_squaring");
}

#[test]
fn spectrum_convergence_table() {
    let dir = TempDir::new().unwrap();
    let out = convdiff(dir.path(), &["spectrum", "--n-list", "16,32", "--k", "4", "--out", "s"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("s/convergence.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("n,index")));
    assert_eq!(code(&convdiff(dir.path(), &["spectrum", "--n-list", "32,16"])), 1);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("run.toml"), "eps = 0.25\nn = 3\nformat = \"json\"\nout = \"from-file\"\n").unwrap();
    let out = convdiff(dir.path(), &["build", "--config", "run.toml", "--n", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("from-file/A.json"));
    assert_eq!(doc["config"]["epsilon"], 0.25);
    assert_eq!(doc["config"]["n"], 5);

    std::fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
    assert_eq!(code(&convdiff(dir.path(), &["build", "--config", "bad.toml"])), 1);
    assert_eq!(code(&convdiff(dir.path(), &["build", "--config", "absent.toml"])), 3);
}

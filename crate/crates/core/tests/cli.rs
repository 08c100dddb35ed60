use std::path::Path;
use std::process::{Command, Output};

fn dbqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbqg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn shipped_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs/default_experiment.toml")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn run_with_shipped_config_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let config = shipped_config();
    let result = dbqg(&["run", &config, "--trials", "1", "--out", &out]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    for name in ["summary.csv", "curves.csv", "records.jsonl", "plot.py"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    // six algorithms times five sweep points, plus the header
    assert_eq!(summary.lines().count(), 31);
    assert!(!summary.contains('\r'));
}

#[test]
fn single_is_deterministic() {
    let a = dbqg(&["single", "--algo", "dbqg", "--seed", "7"]);
    let b = dbqg(&["single", "--algo", "dbqg", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("generation,best_db,evaluations"));
    assert!(text.contains("after 5036 evaluations"));
    let c = dbqg(&["single", "--algo", "dbqg", "--seed", "8"]);
    assert_ne!(text.as_bytes(), &c.stdout[..]);
}

#[test]
fn single_requires_a_seed() {
    let result = dbqg(&["single", "--algo", "dbqg"]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("--seed"));
}

#[test]
fn unknown_algorithm_fails() {
    let result = dbqg(&["single", "--algo", "annealing", "--seed", "1"]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("unknown algorithm"));
}

#[test]
fn malformed_config_fails_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "trials = \"many\"\n").unwrap();
    let result = dbqg(&["run", &path.to_string_lossy()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("broken.toml"));

    let missing = dir.path().join("absent.toml");
    let result = dbqg(&["run", &missing.to_string_lossy()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("absent.toml"));
}

#[test]
fn bad_flags_print_usage() {
    let result = dbqg(&["run"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("Usage"));
    assert_eq!(dbqg(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_shortcut_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let result = dbqg(&[
        "sweep", "--points", "-5,15", "--algos", "gfba,mmse", "--trials", "2", "--out", &out, "--no-plot",
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert!(!dir.path().join("plot.py").exists());
}

#[test]
fn verify_reports_hit_rates() {
    let result = dbqg(&["verify", "--trials", "20"]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("dbqg global-optimum hit rate"));
    assert!(text.contains("PASS"));
}

#[test]
fn config_subcommand_prints_loadable_toml() {
    let result = dbqg(&["config"]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(dbqg::harness::ExperimentConfig::from_toml_str(&text).is_ok());
}

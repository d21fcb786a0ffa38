//! The `codeedu-eval` binary end to end, in mock mode.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_codeedu-eval"));
    cmd.env_remove("CODEEDU_PROVIDER_CONFIG");
    cmd
}

fn run_in(out: &Path, extra: &[&str]) -> Output {
    let out = out.to_str().unwrap();
    let mut args = vec!["run", "--out", out];
    args.extend_from_slice(extra);
    bin().args(args).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &["--tutor", "baseline", "--level", "low", "--n", "5", "--no-judge", "--seed", "3"];

#[test]
fn mock_run_writes_results_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), SMALL);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("tutor"), "{stdout}");
    assert!(stdout.contains("baseline  low"), "{stdout}");
    for file in ["results.json", "results.csv", "quality.json", "episodes.json"] {
        assert!(dir.path().join(file).is_file(), "{file}");
        assert!(stdout.contains(file), "{file}");
    }
    assert!(dir.path().join("fixtures").join("llm.json").is_file());

    let results = read_json(&dir.path().join("results.json"));
    let config = &results["config"];
    assert_eq!(config["k"], 3);
    assert_eq!(config["m"], 10);
    assert_eq!(config["turns"], 20);
    assert_eq!(config["folds"], 5);
    assert_eq!(config["seed"], 3);
    assert_eq!(config["n"], 5);
    assert_eq!(config["tutors"], json!(["baseline"]));
    assert_eq!(config["levels"], json!(["low"]));
    assert_eq!(config["judge"], false);
    let folds: Vec<usize> = results["folds"].as_array().unwrap().iter().map(|f| f.as_array().unwrap().len()).collect();
    assert_eq!(folds, vec![1; 5]);

    let episodes = read_json(&dir.path().join("episodes.json"));
    assert_eq!(episodes.as_array().unwrap().len(), 5);
}

#[test]
fn same_seed_gives_identical_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_in(a.path(), SMALL).status.success());
    assert!(run_in(b.path(), SMALL).status.success());
    let read = |d: &Path| std::fs::read(d.join("results.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn explicit_fixture_dir_is_used_as_is() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fx");
    codeedu_core::fixtures::write_bundled(&fixtures).unwrap();
    let out_dir = dir.path().join("out");
    let mut args = SMALL.to_vec();
    args.extend(["--fixtures", fixtures.to_str().unwrap()]);
    let out = run_in(&out_dir, &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.join("fixtures").exists());

    std::fs::write(fixtures.join("llm.json"), "not json").unwrap();
    let out = run_in(&dir.path().join("out2"), &args);
    assert!(!out.status.success());
}

#[test]
fn invalid_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        &["--level", "expert"][..],
        &["--tutor", "human"],
        &["--k", "three"],
    ] {
        let out = run_in(dir.path(), bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    let out = bin().arg("run").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "--out is required");

    for bad in [&["--n", "1"][..], &["--folds", "0"], &["--k", "0"], &["--m", "5"]] {
        let out = run_in(dir.path(), bad);
        assert_eq!(out.status.code(), Some(1), "{bad:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{bad:?}");
    }
}

#[test]
fn live_provider_requires_config_and_env_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--provider", "acme"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--provider-config"));

    // A key in the config file is ignored; only the environment counts.
    let config = dir.path().join("providers.json");
    std::fs::write(
        &config,
        json!({
            "providers": [{"id": "acme", "base_url": "http://127.0.0.1:9", "model_names": ["m1"], "api_key": "sk-file"}],
            "bindings": []
        })
        .to_string(),
    )
    .unwrap();
    let out = bin()
        .env_remove("CODEEDU_PROVIDER_ACME_KEY")
        .args(["run", "--provider", "acme", "--out", dir.path().to_str().unwrap()])
        .env("CODEEDU_PROVIDER_CONFIG", &config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("CODEEDU_PROVIDER_ACME_KEY is not set"), "{stderr}");

    let out = bin()
        .env("CODEEDU_PROVIDER_OTHER_KEY", "x")
        .args(["run", "--provider", "other", "--provider-config", config.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("provider `other` is not in"));
}

#[test]
fn check_reports_broken_reference_solutions() {
    let out = bin().arg("check").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("all reference solutions pass"));

    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Value> = (0..2).map(|i| json!({"input": format!("{i}\n"), "expected_output": format!("{}", i * 2)})).collect();
    let good = json!({"problem_id": "double", "title": "t", "statement": "s", "test_cases": cases,
        "reference_solution": "print(int(input()) * 2)\n"});
    let bad = json!({"problem_id": "wrong", "title": "t", "statement": "s", "test_cases": cases,
        "reference_solution": "print(int(input()) + 1)\n"});
    let file = dir.path().join("problems.jsonl");
    std::fs::write(&file, format!("{good}\n{bad}\n")).unwrap();
    let out = bin().args(["check", "--m", "2", "--problems", file.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "FAIL wrong\n");
}

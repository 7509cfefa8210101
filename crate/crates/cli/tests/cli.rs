//! End-to-end CLI behavior: caching, stale-cache detection, verify, report.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn geocume(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geocume"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("cfg.json");
    fs::write(
        &path,
        serde_json::json!({
            "name": "cli-test",
            "d": 2,
            "process": {"kind": "poisson", "intensity": 1.0},
            "score": {"kind": "count"},
            "test_function": {"kind": "constant", "c": 1.0},
            "n_grid": [50.0, 100.0, 200.0],
            "replicates": 40,
            "kmax": 2,
            "seed": 7,
            "checks": ["variance", "cumulant_growth"]
        })
        .to_string(),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sample_is_idempotent_and_digest_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = geocume(&["sample", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("generated=120"), "{stdout}");

    // Rerun: full cache hit.
    let out = geocume(&["sample", "--config", &cfg, "--out", "o"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("generated=0") && stdout.contains("cached=120"), "{stdout}");

    // Changed parameter: new digest, full regeneration.
    let out = geocume(
        &["sample", "--config", &cfg, "--out", "o", "--set", "process.intensity=2.0"],
        dir.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("generated=120"), "{stdout}");
    assert_eq!(fs::read_dir(dir.path().join("o/cache")).unwrap().count(), 2);
}

#[test]
fn stale_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = geocume(&["sample", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success());
    // Corrupt one cached file's digest stamp in place.
    let cache = dir.path().join("o/cache");
    let digest_dir = fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let file = digest_dir.join("n0_rep0.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    v["spec_digest"] = serde_json::json!("deadbeef");
    fs::write(&file, v.to_string()).unwrap();
    let out = geocume(&["run", "--config", &cfg, "--out", "o"], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("stale cache"), "{stderr}");
}

#[test]
fn run_emits_outputs_and_report_charts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = geocume(&["run", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success(), "{out:?}");
    for f in ["statistics.csv", "results.csv", "summary.json"] {
        assert!(dir.path().join("o").join(f).exists(), "{f} missing");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["pass"], serde_json::json!(true));
    assert_eq!(summary["seed"], serde_json::json!(7));

    let out = geocume(&["report", "--results", "o"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("o/var_over_n.svg").exists());
    assert!(dir.path().join("o/cumulants_over_n.svg").exists());

    // Report on an empty directory errors out.
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = geocume(&["report", "--results", "empty"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn run_rejects_invalid_pairing_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    // RSA without marks is a config error.
    let out = geocume(
        &["run", "--config", &cfg, "--out", "o", "--set", r#"score={"kind":"rsa","r":0.5}"#],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("marks"));

    // --seed shadows the config seed and lands in the outputs.
    let out = geocume(
        &["run", "--config", &cfg, "--out", "s", "--seed", "99"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let results = fs::read_to_string(dir.path().join("s/results.csv")).unwrap();
    assert!(results.lines().nth(1).unwrap().ends_with(",99"));
}

#[test]
fn verify_suites_pass_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let out = geocume(&["verify", "--suite", "all"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    for suite in ["combinatorics", "matrix", "sigeom"] {
        assert!(stdout.contains(suite), "{stdout}");
    }
    assert!(start.elapsed().as_secs() < 60);
    let out = geocume(&["verify", "--suite", "nonsense"], dir.path());
    assert!(!out.status.success());
}

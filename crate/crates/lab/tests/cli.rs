use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hardy_lab::RunReport;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_report(path: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identities_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    let out = lab(&[
        "identities",
        "--n-points",
        "4",
        "--samples",
        "50",
        "--seed",
        "7",
        "--out",
        path_str(&json),
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("identities: 250 checks, 0 violations"));

    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["command", "config", "checks", "aggregates"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    let report = read_report(&json);
    assert_eq!(report.config.seed, 7);
    assert_eq!(
        report.aggregates.violations,
        report.checks.iter().filter(|c| !c.pass).count()
    );

    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("resolution,quantity,value"));
    assert!(text.lines().any(|l| l == "4,violations,0"));
}

#[test]
fn report_is_rerunnable_from_its_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = lab(&[
        "theorem",
        "--n-points",
        "8",
        "--depth",
        "2",
        "--samples",
        "40",
        "--seed",
        "3",
        "--out",
        path_str(&first),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let second = dir.path().join("second.json");
    let out = lab(&[
        "theorem",
        "--config",
        path_str(&first),
        "--out",
        path_str(&second),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let (a, b) = (read_report(&first), read_report(&second));
    assert_eq!(a.checks, b.checks);
    assert_eq!(
        a.aggregates.empirical_max_ratio,
        b.aggregates.empirical_max_ratio
    );
    assert_eq!(a.config.seed, b.config.seed);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_points": 6, "samples": 10}"#).unwrap();
    assert_eq!(
        lab(&["lemmas", "--config", path_str(&cfg)]).status.code(),
        Some(2)
    );

    let out_path = dir.path().join("r.json");
    let out = lab(&[
        "lemmas",
        "--config",
        path_str(&cfg),
        "--n-points",
        "8",
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_report(&out_path);
    assert_eq!((report.config.n_points, report.config.samples), (8, 10));
}

#[test]
fn bad_config_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_pionts": 8}"#).unwrap();
    assert_eq!(
        lab(&["identities", "--config", path_str(&cfg)])
            .status
            .code(),
        Some(2)
    );
    fs::write(&cfg, "not json").unwrap();
    assert_eq!(
        lab(&["identities", "--config", path_str(&cfg)])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        lab(&["identities", "--config", path_str(&missing)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["identities", "--n-points", "6"][..],
        &["lemmas", "--samples", "0"],
        &["theorem", "--tol", "-1"],
        &["theorem", "--depth", "0"],
        &["identities", "--max-degree", "4", "--n-points", "8"],
        &["constant-search", "--budget", "-3"],
        &["constant-search", "--budget", "5000000"],
        &["convergence", "--resolutions", "8,12,18"],
        &["identities", "--n-points", "64", "--depth", "5"],
        &["unknown-command"],
        &[],
    ] {
        assert_eq!(lab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn zero_tolerance_reports_round_off() {
    let out = lab(&["identities", "--samples", "100", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8(out.stdout)
        .unwrap()
        .contains(" 0 violations"));
}

#[test]
fn constant_search_contract() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = lab(&[
            "constant-search",
            "--budget",
            "0",
            "--seed",
            "9",
            "--samples",
            "2",
            "--out",
            path_str(p),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ra, rb) = (read_report(&a), read_report(&b));
    let sa = ra.search.unwrap();
    assert_eq!(sa.best_ratio, rb.search.unwrap().best_ratio);
    assert!(sa.traces.iter().all(|t| t.best.len() == 1));
    assert_eq!(sa.traces[0].best[0], sa.initial_ratio);

    let c = dir.path().join("c.json");
    let out = lab(&[
        "constant-search",
        "--budget",
        "150",
        "--seed",
        "9",
        "--samples",
        "2",
        "--out",
        path_str(&c),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let search = read_report(&c).search.unwrap();
    for t in &search.traces {
        assert_eq!(t.best.len(), 151);
        assert!(t.best.windows(2).all(|w| w[0] <= w[1]));
    }
    assert!(search.best_ratio >= sa.best_ratio);
    assert!(search.best_ratio <= hardy_core::inequality::C_PROOF);
    let rebuilt = search.argmax.theorem_report().unwrap();
    assert!((rebuilt.ratio - search.best_ratio).abs() <= 1e-12);
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let out = lab(&[
        "convergence",
        "--resolutions",
        "4,8,16",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["resolution", "quantity", "value"]
    );
    let rows: Vec<(usize, String, f64)> = rdr.deserialize().map(Result::unwrap).collect();
    let b4 = rows.iter().find(|r| r.0 == 4 && r.1 == "b").unwrap().2;
    assert!((b4 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert_eq!(rows.iter().filter(|r| r.1 == "b").count(), 3);
}

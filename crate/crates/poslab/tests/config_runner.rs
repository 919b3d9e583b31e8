use std::process::Command;

use poslab::config::{ConfigError, Group, SuiteConfig, SuiteSpec};
use poslab::runner::{self, EXIT_OK, EXIT_VIOLATION};

const SMALL: &str = r#"{
  "seed": 5,
  "suites": [
    {"name": "product_bound", "dims": [2], "grid_step": 0.25, "trials": 200},
    {"name": "trace_product", "max_n": 2, "trials": 100},
    {"name": "thresholds", "max_n": 2, "trials": 20, "models": ["split_p1"]},
    {"name": "constants", "max_n": 3, "trials": 50}
  ],
  "models": [
    {"kind": "split_p1", "name": "example", "alpha": [3, 2], "beta": [1, 0.5]}
  ]
}"#;

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("poslab-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn shipped_config_parses_and_covers_every_group() {
    let c = SuiteConfig::default_config();
    for g in [Group::Verify, Group::Thresholds, Group::Bounds, Group::Ma] {
        assert!(!c.restricted(g).suites.is_empty(), "{g:?}");
    }
    assert!(c.restricted(Group::Verify).models.is_empty());
    assert_eq!(c.restricted(Group::Bounds).models.len(), c.models.len());
}

#[test]
fn invalid_configs_are_rejected() {
    let unknown = r#"{"suites": [{"name": "no_such_suite"}]}"#;
    assert!(matches!(SuiteConfig::from_json(unknown), Err(ConfigError::Parse(_))));
    let extra = r#"{"suites": [{"name": "constants", "max_n": 3, "trials": 1, "bogus": 1}]}"#;
    assert!(SuiteConfig::from_json(extra).is_err());
    for tol in ["0", "-1e-9"] {
        let text = format!(r#"{{"tolerance": {tol}}}"#);
        assert!(matches!(SuiteConfig::from_json(&text), Err(ConfigError::Invalid(_))));
    }
    let odd_grid = r#"{"suites": [{"name": "ma_linear", "size": 9}]}"#;
    assert!(matches!(SuiteConfig::from_json(odd_grid), Err(ConfigError::Invalid(_))));
    let not_hermitian = r#"{"models": [{"kind": "torus", "name": "x",
        "alpha": {"re": [[1, 0], [0, 1]], "im": [[0, 1], [1, 0]]},
        "beta": {"re": [[1, 0], [0, 1]]}}]}"#;
    assert!(matches!(
        SuiteConfig::from_json(not_hermitian),
        Err(ConfigError::Invalid(_))
    ));
    assert!(matches!(
        SuiteConfig::load(std::path::Path::new("/nonexistent/poslab.json")),
        Err(ConfigError::Read { .. })
    ));
}

#[test]
fn suite_names_round_trip() {
    let c = SuiteConfig::from_json(SMALL).unwrap();
    let names: Vec<String> = c.suites.iter().map(SuiteSpec::name).collect();
    assert_eq!(names, ["product_bound", "trace_product", "thresholds", "constants"]);
    let gf = SuiteConfig::from_json(r#"{"suites": [{"name": "g_f", "max_n": 3, "trials": 1}]}"#).unwrap();
    assert_eq!(gf.suites[0].name(), "g_f");
}

#[test]
fn empty_config_runs_clean() {
    let c = SuiteConfig::from_json("{}").unwrap();
    let out = runner::run(&c, false).unwrap();
    assert_eq!(out.reports().count(), 0);
    assert_eq!(out.exit_code(), EXIT_OK);
}

#[test]
fn runs_are_deterministic_and_parallel_agrees() {
    let c = SuiteConfig::from_json(SMALL).unwrap();
    let a = runner::run(&c, false).unwrap();
    let b = runner::run(&c, false).unwrap();
    let p = runner::run(&c, true).unwrap();
    assert_eq!(runner::report_json(&a), runner::report_json(&b));
    assert_eq!(runner::report_json(&a), runner::report_json(&p));
    assert_eq!(a.exit_code(), EXIT_OK);
    assert_eq!(a.bounds.len(), 1);
    let mut other = c.clone();
    other.seed = 6;
    assert_ne!(
        runner::report_json(&a),
        runner::report_json(&runner::run(&other, false).unwrap())
    );
}

#[test]
fn asserting_the_improved_trace_inequality_is_a_violation() {
    let text = r#"{"suites": [{"name": "trace_product_improved", "dims": [3], "trials": 300, "assert": true}]}"#;
    let out = runner::run(&SuiteConfig::from_json(text).unwrap(), false).unwrap();
    assert_eq!(out.exit_code(), EXIT_VIOLATION);
    let v = out.violations();
    assert_eq!(v.len(), 1);
    assert!(!v[0].worst_input.is_empty());
    let recorded = text.replace("true", "false");
    let out = runner::run(&SuiteConfig::from_json(&recorded).unwrap(), false).unwrap();
    assert_eq!(out.exit_code(), EXIT_OK);
}

#[test]
fn outputs_are_written_with_fixed_headers() {
    let c = SuiteConfig::from_json(SMALL).unwrap();
    let out = runner::run(&c, false).unwrap();
    let dir = scratch("outputs");
    let written = runner::write_outputs(&out, &dir, true, true).unwrap();
    assert_eq!(written.len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["passed"], true);
    let margins = std::fs::read_to_string(dir.join("margins.csv")).unwrap();
    assert_eq!(margins.lines().next().unwrap(), poslab::report::CSV_COLUMNS.join(","));
    assert_eq!(margins.lines().count(), out.reports().count() + 1);
    let bounds = std::fs::read_to_string(dir.join("bounds.csv")).unwrap();
    assert!(bounds.lines().nth(1).unwrap().starts_with("example,2,"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cli_exit_codes() {
    let dir = scratch("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let bin = env!("CARGO_BIN_EXE_poslab");
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let ok = write("ok.json", SMALL);
    let status = Command::new(bin)
        .args(["verify", "--format", "csv", "--config"])
        .arg(&ok)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    assert!(dir.join("out/margins.csv").exists());
    assert!(!dir.join("out/report.json").exists());

    let bad = write("bad.json", r#"{"suites": [{"name": "nope"}]}"#);
    let status = Command::new(bin).arg("all").arg("--config").arg(&bad).output().unwrap();
    assert_eq!(status.status.code(), Some(1));

    let violating = write(
        "violating.json",
        r#"{"suites": [{"name": "trace_product_improved", "dims": [3], "trials": 200, "assert": true}]}"#,
    );
    let status = Command::new(bin)
        .arg("verify")
        .arg("--config")
        .arg(&violating)
        .arg("--out")
        .arg(dir.join("out2"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("trace_product_improved.n3"));
    let _ = std::fs::remove_dir_all(&dir);
}

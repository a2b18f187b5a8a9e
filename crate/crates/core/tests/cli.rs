mod common;

use std::fs;
use std::process::Command;

use common::{cqa, BIN};
use cqa_eval::io::parse_meta_line;

const SUBCOMMANDS: [&str; 8] = [
    "ingest",
    "preprocess",
    "score-regression",
    "score-contrastive",
    "inject",
    "score-metrics",
    "analyze",
    "report",
];

fn error_json(stderr: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(stderr);
    let line = text.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

#[test]
fn help_for_every_subcommand() {
    for sub in SUBCOMMANDS {
        let out = cqa(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(
            text.contains("Usage:") && text.contains("--input"),
            "{sub}: {text}"
        );
    }
    let out = cqa(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in SUBCOMMANDS {
        assert!(String::from_utf8_lossy(&out.stdout).contains(sub));
    }
    assert_eq!(cqa(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = cqa(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out.stderr);
    assert_eq!(err["error"]["kind"], "usage");
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn analyze_without_metric_values_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = cqa(&["analyze", "--output", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = error_json(&out.stderr);
    assert_eq!(err["error"]["kind"], "missing_input");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("metric_values"));
    assert!(!out_dir.exists() || fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn config_errors_have_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"analysis": {"confidence": 2.0}}"#).unwrap();
    let out = cqa(&["report", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out.stderr)["error"]["kind"], "config");

    fs::write(&config, r#"{"unknown_key": 1}"#).unwrap();
    let out = cqa(&["report", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(BIN)
        .args(["report", "--output", dir.path().to_str().unwrap()])
        .env("CQA_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_input_fails_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let posts = dir.path().join("Posts.xml");
    fs::write(
        &posts,
        "<posts>\n<row Id=\"1\" PostTypeId=\"1\" CreationDate=\"2021-01-01\" />\n</post>\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cqa(&[
        "ingest",
        "--input",
        posts.to_str().unwrap(),
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
    let err = error_json(&out.stderr);
    assert_eq!(err["error"]["kind"], "invalid_data");
    assert!(err["error"]["message"].as_str().unwrap().contains("line 3"));
    assert!(!out_dir.exists() || fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn seed_precedence_is_config_then_env_then_flag() {
    let dir = tempfile::tempdir().unwrap();
    let posts = dir.path().join("Posts.xml");
    fs::write(&posts, cqa_eval::synth::posts_fixture(5, 1).to_xml()).unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"seed": 11}"#).unwrap();
    let seed_of = |env: Option<&str>, flag: Option<&str>| {
        let out_dir = dir.path().join("out");
        let mut cmd = Command::new(BIN);
        cmd.args(["ingest", "--config", config.to_str().unwrap()])
            .args([
                "--input",
                posts.to_str().unwrap(),
                "--output",
                out_dir.to_str().unwrap(),
            ])
            .env_remove("CQA_SEED")
            .env_remove("CQA_LOG");
        if let Some(v) = env {
            cmd.env("CQA_SEED", v);
        }
        if let Some(v) = flag {
            cmd.args(["--seed", v]);
        }
        let out = cmd.output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = fs::read_to_string(out_dir.join("questions.jsonl")).unwrap();
        parse_meta_line(text.lines().next().unwrap()).unwrap().seed
    };
    assert_eq!(seed_of(None, None), 11);
    assert_eq!(seed_of(Some("22"), None), 22);
    assert_eq!(seed_of(Some("22"), Some("33")), 33);
}

#[test]
fn outputs_may_not_overwrite_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    fs::write(&report, "{}").unwrap();
    let out = cqa(&[
        "report",
        "--input",
        report.to_str().unwrap(),
        "--output",
        &format!("report_md={}", report.display()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&report).unwrap(), "{}");
}

#[test]
fn unknown_roles_are_rejected() {
    let out = cqa(&["report", "--input", "pairs=x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out.stderr)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("pairs"));
}

mod common;

use std::fs;

use cqa_eval::ingest::IngestStats;
use cqa_eval::io::{is_meta_line, parse_meta_line, read_jsonl_file};
use cqa_eval::preprocess::PipelineStats;
use cqa_eval::scoring::{ContrastPair, PairSource};

#[test]
fn full_pipeline_produces_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let files = common::run_pipeline(dir.path(), 50, 7, 2);
    for name in [
        "questions.jsonl",
        "answers.jsonl",
        "ingest_stats.json",
        "clean_questions.jsonl",
        "clean_answers.jsonl",
        "preprocess_stats.json",
        "regression_scores.jsonl",
        "pairs.jsonl",
        "references.jsonl",
        "synthetic_answers.jsonl",
        "synthetic_scores.jsonl",
        "synthetic_pairs.jsonl",
        "metric_values.jsonl",
        "report.json",
        "curves.csv",
        "correlations.csv",
        "report.md",
    ] {
        assert!(files.contains_key(name), "missing {name}");
    }

    let meta_of = |name: &str| {
        let text = String::from_utf8(files[name].clone()).unwrap();
        let first = text.lines().next().unwrap().to_string();
        assert!(is_meta_line(&first), "{name}: {first}");
        parse_meta_line(&first).unwrap()
    };
    let meta = meta_of("pairs.jsonl");
    assert_eq!(meta.subcommand, "score-contrastive");
    assert_eq!(meta.seed, 7);
    assert!(meta.input_digests.contains_key("clean_answers"));
    assert!(String::from_utf8_lossy(&files["curves.csv"]).starts_with("# meta: {"));
    assert!(String::from_utf8_lossy(&files["report.md"]).starts_with("<!-- meta: {"));

    let out = dir.path().join("out");
    let report: serde_json::Value = serde_json::from_slice(&files["report.json"]).unwrap();
    assert_eq!(report["meta"]["subcommand"], "analyze");
    assert_eq!(report["models"].as_array().unwrap().len(), 2);
    assert!(
        report["reward_validation"]["sign_accuracy"]
            .as_f64()
            .unwrap()
            > 0.5
    );
    assert!(!report["comparisons"].as_array().unwrap().is_empty());

    let stats: serde_json::Value = serde_json::from_slice(&files["preprocess_stats.json"]).unwrap();
    let stats: PipelineStats = serde_json::from_value({
        let mut s = stats;
        s.as_object_mut().unwrap().remove("meta");
        s
    })
    .unwrap();
    assert!(stats.is_balanced());
    let ingest: serde_json::Value = serde_json::from_slice(&files["ingest_stats.json"]).unwrap();
    let ingest: IngestStats = serde_json::from_value({
        let mut s = ingest;
        s.as_object_mut().unwrap().remove("meta");
        s
    })
    .unwrap();
    assert_eq!(
        ingest.train_questions + ingest.validation_questions,
        ingest.questions_after_tag_filter
    );
    assert_eq!(ingest.orphan_answers, 1);

    let pairs: Vec<ContrastPair> = read_jsonl_file(&out.join("pairs.jsonl")).unwrap();
    assert!(pairs
        .iter()
        .all(|p| p.preferred_score > p.other_score && p.source == PairSource::Human));
    let synthetic: Vec<ContrastPair> = read_jsonl_file(&out.join("synthetic_pairs.jsonl")).unwrap();
    assert!(!synthetic.is_empty());
    assert!(synthetic
        .iter()
        .all(|p| p.source == PairSource::Generated && p.other_score == -1));
    let _ = fs::metadata(out.join("report.md")).unwrap();
}

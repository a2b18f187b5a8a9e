//! Runs every pipeline stage in-process on generated data and prints the
//! rendered report.

use std::fs;

use cqa_eval::ingest::WithSplit;
use cqa_eval::io::{jsonl_bytes, read_jsonl_file};
use cqa_eval::metrics::{Metric, Reference};
use cqa_eval::pipeline::{run, RunConfig, Stage};
use cqa_eval::preprocess::CleanAnswer;
use cqa_eval::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut config = RunConfig {
        seed: 42,
        out_dir: dir.path().join("out"),
        ..Default::default()
    };
    let posts = dir.path().join("Posts.xml");
    fs::write(&posts, synth::posts_fixture(40, 42).to_xml())?;
    config.paths.insert("posts".into(), posts);
    config.analysis.bootstrap_samples = 200;
    config.metrics.metrics = vec![Metric::Sacrebleu, Metric::Rouge1, Metric::Rouge2];

    for stage in [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::ScoreRegression,
        Stage::ScoreContrastive,
    ] {
        run(stage, &config)?;
    }
    let answers: Vec<WithSplit<CleanAnswer>> = read_jsonl_file(&config.path("clean_answers"))?;
    println!("{} clean answers", answers.len());

    let references: Vec<Reference> = read_jsonl_file(&config.path("references"))?;
    let generations = synth::model_generations(&references, 5, 0.7, 42);
    let gen_path = dir.path().join("generations.jsonl");
    fs::write(&gen_path, jsonl_bytes(None, &generations)?)?;
    config.paths.insert("generations".into(), gen_path);

    for stage in [Stage::ScoreMetrics, Stage::Analyze, Stage::Report] {
        run(stage, &config)?;
    }
    println!("{}", fs::read_to_string(config.path("report_md"))?);
    Ok(())
}

//! Drives the `cqa-eval` binary through every stage on synthetic data.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqa_eval::ingest::{Split, WithSplit};
use cqa_eval::io::{jsonl_bytes, read_jsonl_file};
use cqa_eval::metrics::{generation_text_id, reference_text_id, Generation, Reference};
use cqa_eval::preprocess::CleanAnswer;
use cqa_eval::scoring::RegressionScore;
use cqa_eval::synth;

pub const BIN: &str = env!("CARGO_BIN_EXE_cqa-eval");

pub fn cqa(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CQA_SEED")
        .env_remove("CQA_LOG")
        .output()
        .expect("binary runs")
}

pub fn cqa_ok(args: &[&str]) {
    let out = cqa(args);
    assert!(
        out.status.success(),
        "cqa-eval {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) {
    fs::write(path, jsonl_bytes(None, rows).unwrap()).unwrap();
}

struct ModelFiles {
    generations: PathBuf,
    embeddings: PathBuf,
    reg: PathBuf,
    contr: PathBuf,
    relevance: PathBuf,
}

fn model_inputs(
    dir: &Path,
    label: &str,
    references: &[Reference],
    quality: f64,
    seed: u64,
) -> ModelFiles {
    let generations = synth::model_generations(references, 10, quality, seed);
    let mut texts: Vec<(String, String)> = references
        .iter()
        .map(|r| (reference_text_id(r.question_id), r.text.clone()))
        .collect();
    texts.extend(
        generations
            .iter()
            .map(|g| (generation_text_id(g.question_id, g.attempt), g.text.clone())),
    );
    let files = ModelFiles {
        generations: dir.join(format!("{label}_generations.jsonl")),
        embeddings: dir.join(format!("{label}_embeddings.jsonl")),
        reg: dir.join(format!("{label}_reg_rewards.jsonl")),
        contr: dir.join(format!("{label}_contr_rewards.jsonl")),
        relevance: dir.join(format!("{label}_relevance.jsonl")),
    };
    write_jsonl(&files.generations, &generations);
    write_jsonl(
        &files.embeddings,
        &synth::embedding_rows(&texts, 16).unwrap(),
    );
    write_jsonl(
        &files.reg,
        &synth::generation_rewards(&generations, references, 0.2, seed + 1),
    );
    write_jsonl(
        &files.contr,
        &synth::generation_rewards(&generations, references, 0.5, seed + 2),
    );
    write_jsonl(
        &files.relevance,
        &synth::relevance_labels(&generations, references, 0.6),
    );
    files
}

/// Runs ingest through report in `dir` with `threads` workers and returns
/// every stage output keyed by file name.
pub fn run_pipeline(
    dir: &Path,
    n_questions: usize,
    seed: u64,
    threads: usize,
) -> BTreeMap<String, Vec<u8>> {
    let out = dir.join("out");
    let ext = dir.join("external");
    fs::create_dir_all(&out).unwrap();
    fs::create_dir_all(&ext).unwrap();
    let fixture = synth::posts_fixture(n_questions, seed);
    let posts = ext.join("Posts.xml");
    fs::write(&posts, fixture.to_xml()).unwrap();

    let config = serde_json::json!({
        "seed": seed,
        "out_dir": out,
        "paths": { "posts": posts },
        "metrics": { "metrics": ["sacrebleu", "rouge1", "rouge2", "bertscore", "reg_reward", "contr_reward"] },
        "analysis": {
            "bootstrap_samples": 200,
            "label": "tuned",
            "compare": [{
                "label": "base",
                "metric_values": ext.join("base_metric_values.jsonl"),
                "relevance": ext.join("base_relevance.jsonl"),
            }],
            "reward_validation": true,
        },
    });
    let config_path = ext.join("config.json");
    fs::write(&config_path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    let config_arg = config_path.to_str().unwrap().to_string();
    let threads_arg = threads.to_string();
    let stage = |name: &str, extra: &[&str]| {
        let mut args = vec![name, "--config", &config_arg, "--threads", &threads_arg];
        args.extend_from_slice(extra);
        cqa_ok(&args);
    };

    stage("ingest", &[]);
    stage("preprocess", &[]);
    stage("score-regression", &[]);
    stage("score-contrastive", &[]);

    let clean: Vec<WithSplit<CleanAnswer>> =
        read_jsonl_file(&out.join("clean_answers.jsonl")).unwrap();
    let mut per_question: BTreeMap<u64, usize> = BTreeMap::new();
    for a in clean.iter().filter(|a| a.split == Split::Train) {
        *per_question.entry(a.record.question_id).or_default() += 1;
    }
    let singles: Vec<u64> = per_question
        .into_iter()
        .filter(|&(_, n)| n == 1)
        .map(|(q, _)| q)
        .collect();
    let synthetic_path = ext.join("synthetic_generations.jsonl");
    write_jsonl(
        &synthetic_path,
        &synth::synthetic_generations(&singles, 2, seed),
    );
    let synthetic_arg = format!("synthetic_generations={}", synthetic_path.display());
    stage("inject", &["--input", &synthetic_arg]);

    let references: Vec<Reference> = read_jsonl_file(&out.join("references.jsonl")).unwrap();
    for (label, quality, model_seed) in [("tuned", 0.75, seed + 10), ("base", 0.45, seed + 20)] {
        let files = model_inputs(&ext, label, &references, quality, model_seed);
        let args: Vec<String> = vec![
            format!("generations={}", files.generations.display()),
            format!("embeddings={}", files.embeddings.display()),
            format!("reg_rewards={}", files.reg.display()),
            format!("contr_rewards={}", files.contr.display()),
        ];
        let mut extra: Vec<&str> = Vec::new();
        for a in &args {
            extra.push("--input");
            extra.push(a);
        }
        let target = if label == "tuned" {
            format!(
                "metric_values={}",
                out.join("metric_values.jsonl").display()
            )
        } else {
            format!(
                "metric_values={}",
                ext.join("base_metric_values.jsonl").display()
            )
        };
        extra.push("--output");
        extra.push(&target);
        stage("score-metrics", &extra);
        if label == "tuned" {
            fs::copy(&files.relevance, out.join("relevance.jsonl")).unwrap();
        }
    }

    let scores: Vec<RegressionScore> =
        read_jsonl_file(&out.join("regression_scores.jsonl")).unwrap();
    let targets: Vec<(u64, f64)> = scores.iter().map(|s| (s.answer_id, s.scaled)).collect();
    write_jsonl(
        &ext.join("answer_rewards.jsonl"),
        &synth::answer_rewards(&targets, 0.3, seed),
    );
    let rewards_arg = format!(
        "answer_rewards={}",
        ext.join("answer_rewards.jsonl").display()
    );
    let relevance_arg = format!("relevance={}", out.join("relevance.jsonl").display());
    stage(
        "analyze",
        &["--input", &rewards_arg, "--input", &relevance_arg],
    );
    stage("report", &[]);

    let mut files = BTreeMap::new();
    for entry in fs::read_dir(&out).unwrap() {
        let entry = entry.unwrap();
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            fs::read(entry.path()).unwrap(),
        );
    }
    files.insert(
        "base_metric_values.jsonl".into(),
        fs::read(ext.join("base_metric_values.jsonl")).unwrap(),
    );
    files
}

pub fn generations_for(references: &[Reference]) -> Vec<Generation> {
    synth::model_generations(references, 10, 0.6, 1)
}

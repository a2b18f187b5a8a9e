//! Checks against the hand-built files under `tests/fixtures` and other
//! worked examples with known answers.

use std::fs;
use std::path::Path;

use cqa_eval::analysis::{correlation_matrix, spearman};
use cqa_eval::ingest::{filter_by_tag, parse_posts, temporal_split, write_posts, Question};
use cqa_eval::io::jsonl_bytes;
use cqa_eval::metrics::{
    bertscore_core, generation_text_id, index_embeddings, reference_text_id, score_all,
    sentence_bleu, tokenize, validate_embeddings, EmbeddingRow, Generation, GenerationReward,
    Metric, MetricValue, Reference, ScoreInputs, ScoreOptions, TokenizerMode,
};
use cqa_eval::preprocess::{classify_api_usage, default_api_usage, run_preprocess, sanitize_html};
use cqa_eval::scoring::{
    build_pairs, contrastive_loss, inject_synthetic, score_question, QuestionScores, ScoredAnswer,
    SyntheticConfig,
};
use cqa_eval::synth;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn small_posts() -> cqa_eval::ingest::ParsedPosts {
    let xml = fs::read(fixture("posts_small.xml")).unwrap();
    parse_posts(xml.as_slice()).unwrap()
}

fn ids(questions: &[Question]) -> Vec<u64> {
    questions.iter().map(|q| q.id).collect()
}

#[test]
fn small_posts_counts() {
    let parsed = small_posts();
    assert_eq!(parsed.questions.len(), 5);
    assert_eq!(parsed.answers.len(), 8);
    assert_eq!(parsed.diagnostics.orphan_answers, 1);
    let a11 = parsed.answers.iter().find(|a| a.id == 11).unwrap();
    assert_eq!(a11.votes, 12);
}

#[test]
fn small_posts_tag_filter_keeps_order() {
    let parsed = small_posts();
    assert_eq!(
        ids(&filter_by_tag(&parsed.questions, "python")),
        vec![1, 3, 5]
    );
}

#[test]
fn small_posts_split_at_default_cutoff() {
    let parsed = small_posts();
    let cutoff = "2021-12-14T23:59:59.999Z".parse().unwrap();
    let (train, validation) = temporal_split(&parsed.questions, cutoff);
    assert_eq!(ids(&train), vec![1, 2, 3]);
    assert_eq!(ids(&validation), vec![4, 5]);
}

#[test]
fn small_posts_acceptance_linkage() {
    let parsed = small_posts();
    for q in &parsed.questions {
        let accepted: Vec<u64> = parsed
            .answers
            .iter()
            .filter(|a| a.question_id == q.id && a.is_accepted)
            .map(|a| a.id)
            .collect();
        match q.accepted_answer_id {
            Some(id) => assert_eq!(accepted, vec![id]),
            None => assert!(accepted.is_empty()),
        }
    }
}

#[test]
fn small_posts_round_trip() {
    let parsed = small_posts();
    let mut xml = Vec::new();
    write_posts(&mut xml, &parsed.questions, &parsed.answers).unwrap();
    let again = parse_posts(xml.as_slice()).unwrap();
    assert_eq!(again.questions, parsed.questions);
    assert_eq!(again.answers, parsed.answers);
}

#[derive(serde::Deserialize)]
struct Labeled {
    title: String,
    body_html: String,
    api_usage: bool,
}

#[test]
fn default_rules_agree_with_hand_labels() {
    let labeled: Vec<Labeled> =
        serde_json::from_str(&fs::read_to_string(fixture("api_usage_labeled.json")).unwrap())
            .unwrap();
    assert_eq!(labeled.len(), 20);
    let rules = default_api_usage().compile().unwrap();
    let created = "2021-01-01T00:00:00Z".parse().unwrap();
    let wrong: Vec<&str> = labeled
        .iter()
        .enumerate()
        .filter(|(i, l)| {
            let q = Question {
                id: *i as u64 + 1,
                title: l.title.clone(),
                body_html: l.body_html.clone(),
                tags: vec!["python".into()],
                creation_date: created,
                accepted_answer_id: None,
            };
            classify_api_usage(&q, &rules) != l.api_usage
        })
        .map(|(_, l)| l.title.as_str())
        .collect();
    assert!(wrong.is_empty(), "misclassified: {wrong:?}");
}

#[test]
fn html_documents_match_golden_text() {
    let mut names: Vec<_> = fs::read_dir(fixture("html"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for path in names {
        let html = fs::read_to_string(&path).unwrap();
        let golden = fs::read_to_string(path.with_extension("txt")).unwrap();
        let text = sanitize_html(&html);
        assert_eq!(text, golden, "{}", path.display());
        assert_eq!(sanitize_html(&text), text, "{}", path.display());
    }
}

#[test]
fn thirty_question_preprocess_accounting() {
    let fixture = synth::posts_fixture(33, 11);
    let parsed = parse_posts(fixture.to_xml().as_slice()).unwrap();
    let questions = filter_by_tag(&parsed.questions, "python");
    assert_eq!(questions.len(), 30);
    let rules = default_api_usage().compile().unwrap();
    let out = run_preprocess(&questions, &parsed.answers, &rules);
    let s = &out.stats;
    assert_eq!(s.questions_in, 30);
    assert!(s.is_balanced());
    let kept: Vec<u64> = out.questions.iter().map(|q| q.id).collect();
    assert_eq!(kept, fixture.expected_clean_ids());
}

#[test]
fn multi_answer_questions_yield_fewer_pairs_than_answers() {
    let fixture = synth::posts_fixture(60, 4);
    let parsed = parse_posts(fixture.to_xml().as_slice()).unwrap();
    let rules = default_api_usage().compile().unwrap();
    let out = run_preprocess(&parsed.questions, &parsed.answers, &rules);
    let scores: Vec<QuestionScores> = cqa_eval::scoring::group_votes(&out.answers)
        .iter()
        .map(score_question)
        .filter(|q| q.answers.len() > 1)
        .collect();
    let answers: usize = scores.iter().map(|q| q.answers.len()).sum();
    let pairs = build_pairs(&scores);
    assert!(!pairs.is_empty());
    assert!(pairs.len() < answers);
    for q in &scores {
        let n = pairs
            .iter()
            .filter(|p| p.question_id == q.question_id)
            .count();
        assert!(n < q.answers.len());
    }
}

#[test]
fn loss_worked_examples() {
    let loss = contrastive_loss(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!((loss - 0.813262).abs() < 1e-6, "{loss}");
    assert!(contrastive_loss(&[50.0], &[0.0]).unwrap() < 1e-20);
}

#[test]
fn synthetic_targets_follow_the_configured_normal() {
    let n = 100_000;
    let questions = vec![QuestionScores {
        question_id: 1,
        answers: vec![ScoredAnswer {
            answer_id: 1,
            score: 2,
            accepted: true,
        }],
    }];
    let generations: Vec<Generation> = (0..n)
        .map(|i| Generation {
            question_id: 1,
            attempt: i,
            text: String::new(),
        })
        .collect();
    let config = SyntheticConfig {
        seed: 2024,
        first_id: 10,
        ..Default::default()
    };
    let batch = inject_synthetic(&questions, &generations, &config).unwrap();
    assert!(batch
        .answers
        .iter()
        .all(|a| (-1.0..=1.0).contains(&a.target)));
    let inside = batch
        .answers
        .iter()
        .filter(|a| (-0.8..=-0.2).contains(&a.target))
        .count() as f64
        / n as f64;
    assert!((inside - 0.9973).abs() < 0.001, "{inside}");
    let again = inject_synthetic(&questions, &generations, &config).unwrap();
    assert_eq!(again, batch);
}

#[test]
fn bleu_is_order_sensitive() {
    let reference = tokenize("open the file then read every line", TokenizerMode::Bleu13a);
    let ordered = tokenize("open the file then read every line", TokenizerMode::Bleu13a);
    let shuffled = tokenize("line every read then file the open", TokenizerMode::Bleu13a);
    let a = sentence_bleu(&ordered, &reference, 4).unwrap();
    let b = sentence_bleu(&shuffled, &reference, 4).unwrap();
    assert_eq!(a, 1.0);
    assert!(b < a);
}

fn scoring_fixture() -> (
    Vec<Generation>,
    Vec<Reference>,
    Vec<EmbeddingRow>,
    Vec<GenerationReward>,
) {
    let references = vec![
        Reference {
            question_id: 1,
            answer_id: 10,
            text: "use sorted with key".into(),
        },
        Reference {
            question_id: 2,
            answer_id: 20,
            text: "call json dumps with indent".into(),
        },
    ];
    let generations = synth::model_generations(&references, 10, 0.6, 8);
    let mut texts: Vec<(String, String)> = references
        .iter()
        .map(|r| (reference_text_id(r.question_id), r.text.clone()))
        .collect();
    texts.extend(
        generations
            .iter()
            .map(|g| (generation_text_id(g.question_id, g.attempt), g.text.clone())),
    );
    let rows = synth::embedding_rows(&texts, 8).unwrap();
    let rewards = synth::generation_rewards(&generations, &references, 0.1, 8);
    (generations, references, rows, rewards)
}

#[test]
fn score_all_cardinality_and_determinism() {
    let (generations, references, rows, rewards) = scoring_fixture();
    let index = index_embeddings(&rows).unwrap();
    let inputs = ScoreInputs {
        generations: &generations,
        references: &references,
        embeddings: Some(&index),
        reg_rewards: Some(&rewards),
        contr_rewards: None,
    };
    let options = ScoreOptions {
        metrics: vec![
            Metric::Sacrebleu,
            Metric::Rouge1,
            Metric::Bertscore,
            Metric::RegReward,
        ],
        bleu_max_n: 4,
    };
    let first = score_all(&inputs, &options).unwrap();
    assert_eq!(first.len(), 80);
    let reward_of = |q: u64, a: u32| {
        rewards
            .iter()
            .find(|r| r.question_id == q && r.attempt == a)
            .unwrap()
            .reward
    };
    for v in first.iter().filter(|v| v.metric == Metric::RegReward) {
        assert_eq!(v.value, reward_of(v.question_id, v.attempt));
    }
    let second = score_all(&inputs, &options).unwrap();
    assert_eq!(
        jsonl_bytes(None, &first).unwrap(),
        jsonl_bytes(None, &second).unwrap()
    );
}

#[test]
fn correlation_matrix_is_per_pair_spearman() {
    let metrics = [Metric::Sacrebleu, Metric::Rouge1, Metric::Rouge2];
    let mut values = Vec::new();
    let mut columns = vec![Vec::new(); 3];
    for cell in 0..50u64 {
        for (m, metric) in metrics.iter().enumerate() {
            let value = ((cell * (m as u64 + 3) * 37 + m as u64 * 11) % 23) as f64 / 23.0;
            columns[m].push(value);
            values.push(MetricValue {
                question_id: cell / 5,
                attempt: (cell % 5) as u32,
                metric: *metric,
                value,
            });
        }
    }
    let matrix = correlation_matrix(&values).unwrap();
    for (i, a) in metrics.iter().enumerate() {
        for (j, b) in metrics.iter().enumerate() {
            let expected = if i == j {
                1.0
            } else {
                spearman(&columns[i], &columns[j]).unwrap()
            };
            assert_eq!(matrix.get(*a, *b), Some(expected), "{a} {b}");
        }
    }
}

#[test]
fn exported_embeddings_round_trip() {
    let texts = [
        "open the file",
        "use a context manager",
        "json dumps with indent",
        "sorted takes a key function",
        "requests get with timeout",
    ];
    let tables: Vec<_> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| synth::pseudo_embedding(&format!("t{i}"), t, 12).unwrap())
        .collect();
    let rows: Vec<EmbeddingRow> = tables.iter().map(EmbeddingRow::encode).collect();
    let document = String::from_utf8(jsonl_bytes(None, &rows).unwrap()).unwrap();
    assert!(validate_embeddings(&document).is_empty());
    for row in &rows {
        let bytes = base64_len(&row.vectors_b64);
        assert_eq!(bytes, row.tokens.len() * row.dim * 4);
        let decoded = row.decode().unwrap();
        let f1 = bertscore_core(&decoded, &decoded).unwrap().f1;
        assert!((f1 - 1.0).abs() < 1e-6);
    }
    let index = index_embeddings(&rows).unwrap();
    assert_eq!(index.len(), 5);
}

fn base64_len(encoded: &str) -> usize {
    let padding = encoded.bytes().rev().take_while(|&b| b == b'=').count();
    encoded.len() / 4 * 3 - padding
}

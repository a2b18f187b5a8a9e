//! Seeded synthetic fixtures: Stack Exchange style posts, model
//! generations, pseudo token embeddings, reward stubs and relevance
//! labels.
//!
//! Everything here is deterministic for a given seed. The embedding and
//! reward helpers stand in for a neural exporter so the whole pipeline can
//! run without one.

use std::collections::HashMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::RelevanceLabel;
use crate::ingest::{self, Answer, Question};
use crate::metrics::{
    rouge_n, tokenize, EmbeddingRow, EmbeddingTable, Generation, GenerationReward, Reference,
    TokenizerMode,
};
use crate::scoring::validation::AnswerReward;
use crate::stats::derive_seed;
use crate::Result;

const LIBRARIES: &[(&str, &str)] = &[
    ("pandas", "read_csv"),
    ("numpy", "reshape"),
    ("requests", "get"),
    ("json", "loads"),
    ("datetime", "strptime"),
    ("itertools", "groupby"),
    ("collections", "counter"),
    ("re", "sub"),
    ("os", "listdir"),
    ("pathlib", "glob"),
    ("logging", "basicconfig"),
    ("subprocess", "run"),
];

const NOUNS: &[&str] = &[
    "list",
    "dataframe",
    "dictionary",
    "string",
    "tuple",
    "iterator",
    "file",
    "column",
    "response",
    "pattern",
    "generator",
    "path",
    "record",
    "buffer",
    "index",
];

const ARGS: &[&str] = &[
    "sep", "axis", "timeout", "encoding", "key", "flags", "mode", "level", "check", "default",
];

const FILLER: &[&str] = &[
    "maybe", "simply", "then", "also", "probably", "value", "result", "works", "here", "instead",
    "first", "again", "fine", "option",
];

const API_TITLES: &[&str] = &[
    "How to use {lib}.{func} with a custom {arg}",
    "How do I call {func} from {lib} on a {noun}",
    "Usage of {lib} {func} for a large {noun}",
    "How can I pass {arg} to {lib}.{func}",
    "Which function should I use in {lib} to build a {noun}",
];

const OTHER_TITLES: &[&str] = &[
    "Why is my loop so slow on a long {noun}",
    "Strange rounding when adding floats",
    "Unexpected output from a nested comprehension",
    "Program hangs after a while",
    "Recursion depth exceeded while walking a tree",
];

/// What a generated question is built to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuestionKind {
    /// API-usage question with at least one plain answer; survives
    /// preprocessing.
    ApiClean,
    /// Not an API-usage question.
    NotApi,
    /// Question body contains a code block.
    RichQuestion,
    /// Every answer contains an image, link or code block.
    AllAnswersRich,
    /// Tagged `java` only; removed by the default tag filter.
    OtherTag,
}

impl QuestionKind {
    fn for_index(i: usize) -> Self {
        match i % 10 {
            0..=5 => QuestionKind::ApiClean,
            6 => QuestionKind::NotApi,
            7 => QuestionKind::RichQuestion,
            8 => QuestionKind::AllAnswersRich,
            _ => QuestionKind::OtherTag,
        }
    }
}

/// A generated post collection plus the kind of every question.
#[derive(Debug, Clone, PartialEq)]
pub struct PostsFixture {
    pub questions: Vec<Question>,
    /// Includes one orphan answer whose question does not exist.
    pub answers: Vec<Answer>,
    pub kinds: Vec<(u64, QuestionKind)>,
}

impl PostsFixture {
    /// Ids of questions built to survive tag filtering and preprocessing.
    pub fn expected_clean_ids(&self) -> Vec<u64> {
        self.kinds
            .iter()
            .filter(|(_, k)| *k == QuestionKind::ApiClean)
            .map(|(id, _)| *id)
            .collect()
    }

    /// The fixture as a `Posts.xml` document.
    pub fn to_xml(&self) -> Vec<u8> {
        let mut out = Vec::new();
        ingest::write_posts(&mut out, &self.questions, &self.answers)
            .expect("writing to a Vec cannot fail");
        out
    }
}

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let (lib, func) = *LIBRARIES.choose(rng).unwrap();
    template
        .replace("{lib}", lib)
        .replace("{func}", func)
        .replace("{arg}", ARGS.choose(rng).unwrap())
        .replace("{noun}", NOUNS.choose(rng).unwrap())
}

fn api_question_body(rng: &mut ChaCha8Rng) -> String {
    fill(
        "<p>I want to call <code>{lib}.{func}</code> on my data &amp; keep the {noun}.</p>\
         <ul><li>input: a <em>{noun}</em></li><li>option: <strong>{arg}</strong></li></ul>",
        rng,
    )
}

fn other_question_body(rng: &mut ChaCha8Rng) -> String {
    fill(
        "<p>I loop over a {noun} and it takes minutes.</p><p>What am I doing wrong here?</p>",
        rng,
    )
}

fn clean_answer_body(rng: &mut ChaCha8Rng) -> String {
    let mut body = fill(
        "<p>Use <code>{lib}.{func}</code> with <em>{arg}</em> set explicitly.</p>",
        rng,
    );
    for _ in 0..rng.gen_range(1..=3) {
        body.push_str(&fill(
            "<p>It returns a {noun} &lt;{noun}&gt; you can iterate over.</p>",
            rng,
        ));
    }
    if rng.gen_bool(0.3) {
        body.push_str(&fill(
            "<ol><li>check the {noun}</li><li>set {arg}</li></ol>",
            rng,
        ));
    }
    body
}

fn rich_answer_body(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => fill(
            "<p>Try this:</p><pre><code>import {lib}\n{lib}.{func}(x)\n</code></pre>",
            rng,
        ),
        1 => fill(
            "<p>See <a href=\"https://docs.example.org/{lib}\">the docs</a> for {func}.</p>",
            rng,
        ),
        _ => fill(
            "<p>Like this for {func}:</p><img src=\"https://img.example.org/{lib}.png\">",
            rng,
        ),
    }
}

fn votes(rng: &mut ChaCha8Rng) -> i64 {
    match rng.gen_range(0..20) {
        0..=2 => -rng.gen_range(1..=5),
        3 => rng.gen_range(100..=500),
        _ => rng.gen_range(0..=30),
    }
}

/// Builds `n` questions with answers, cycling through every
/// [`QuestionKind`]. Creation dates spread over June 2021 to May 2022.
pub fn posts_fixture(n: usize, seed: u64) -> PostsFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: DateTime<Utc> = Utc.with_ymd_and_hms(2021, 6, 1, 0, 0, 0).unwrap();
    let mut questions = Vec::with_capacity(n);
    let mut answers = Vec::new();
    let mut kinds = Vec::with_capacity(n);
    let mut next_answer = 10_000u64;

    for i in 0..n {
        let kind = QuestionKind::for_index(i);
        let id = 100 + i as u64;
        let created = start + Duration::minutes(rng.gen_range(0..365 * 24 * 60));
        let title = match kind {
            QuestionKind::NotApi => fill(OTHER_TITLES.choose(&mut rng).unwrap(), &mut rng),
            _ => fill(API_TITLES.choose(&mut rng).unwrap(), &mut rng),
        };
        let body_html = match kind {
            QuestionKind::NotApi => other_question_body(&mut rng),
            QuestionKind::RichQuestion => format!(
                "{}<pre><code>x = 1\n</code></pre>",
                api_question_body(&mut rng)
            ),
            _ => api_question_body(&mut rng),
        };
        let tags = match kind {
            QuestionKind::OtherTag => vec!["java".to_string()],
            _ => vec![
                "python".to_string(),
                LIBRARIES.choose(&mut rng).unwrap().0.to_string(),
            ],
        };

        let n_answers = rng.gen_range(1..=4);
        let mut ids = Vec::with_capacity(n_answers);
        for j in 0..n_answers {
            let rich = match kind {
                QuestionKind::AllAnswersRich => true,
                QuestionKind::ApiClean => j > 0 && rng.gen_bool(0.25),
                _ => rng.gen_bool(0.25),
            };
            let body_html = if rich {
                rich_answer_body(&mut rng)
            } else {
                clean_answer_body(&mut rng)
            };
            let answer_id = next_answer;
            next_answer += 1;
            ids.push(answer_id);
            answers.push(Answer {
                id: answer_id,
                question_id: id,
                body_html,
                votes: votes(&mut rng),
                is_accepted: false,
                creation_date: created + Duration::hours(rng.gen_range(1..200)),
            });
        }
        let accepted_answer_id = if rng.gen_bool(0.5) {
            ids.choose(&mut rng).copied()
        } else {
            None
        };
        for a in answers.iter_mut().filter(|a| a.question_id == id) {
            a.is_accepted = accepted_answer_id == Some(a.id);
        }
        questions.push(Question {
            id,
            title,
            body_html,
            tags,
            creation_date: created,
            accepted_answer_id,
        });
        kinds.push((id, kind));
    }

    answers.push(Answer {
        id: next_answer,
        question_id: 99,
        body_html: "<p>Answer to a deleted question.</p>".into(),
        votes: 1,
        is_accepted: false,
        creation_date: start,
    });
    PostsFixture {
        questions,
        answers,
        kinds,
    }
}

/// Candidate answers for every reference: each reference word survives
/// with probability `quality`, otherwise it is replaced by filler, and the
/// tail is sometimes cut. Ordered by question id, then attempt.
pub fn model_generations(
    references: &[Reference],
    attempts: u32,
    quality: f64,
    seed: u64,
) -> Vec<Generation> {
    let mut refs: Vec<&Reference> = references.iter().collect();
    refs.sort_by_key(|r| r.question_id);
    let mut out = Vec::with_capacity(refs.len() * attempts as usize);
    for r in refs {
        let words: Vec<&str> = r.text.split_whitespace().collect();
        for attempt in 0..attempts {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                derive_seed(seed, r.question_id),
                attempt as u64,
            ));
            let mut text: Vec<&str> = words
                .iter()
                .map(|w| {
                    if rng.gen_bool(quality.clamp(0.0, 1.0)) {
                        *w
                    } else {
                        FILLER.choose(&mut rng).unwrap()
                    }
                })
                .collect();
            if text.len() > 4 && rng.gen_bool(0.3) {
                let keep = rng.gen_range(text.len() / 2..text.len());
                text.truncate(keep);
            }
            if text.is_empty() {
                text.push(FILLER[0]);
            }
            out.push(Generation {
                question_id: r.question_id,
                attempt,
                text: text.join(" "),
            });
        }
    }
    out
}

/// Low-quality generated answers for the given questions, `per_question`
/// each, used as synthetic negatives.
pub fn synthetic_generations(
    question_ids: &[u64],
    per_question: u32,
    seed: u64,
) -> Vec<Generation> {
    let mut out = Vec::new();
    for &q in question_ids {
        for attempt in 0..per_question {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, q), attempt as u64));
            let words: Vec<&str> = (0..rng.gen_range(5..12))
                .map(|_| *FILLER.choose(&mut rng).unwrap())
                .collect();
            out.push(Generation {
                question_id: q,
                attempt,
                text: words.join(" "),
            });
        }
    }
    out
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Deterministic stand-in for an encoder: one Gaussian vector per token of
/// the simple tokenizer, seeded by the token text. Equal tokens always get
/// equal vectors, so identical texts embed identically.
pub fn pseudo_embedding(text_id: &str, text: &str, dim: usize) -> Result<EmbeddingTable> {
    let tokens = tokenize(text, TokenizerMode::Simple).tokens;
    let mut values = Vec::with_capacity(tokens.len() * dim);
    for t in &tokens {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(t.as_bytes()));
        values.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
    }
    EmbeddingTable::new(text_id.to_string(), dim, tokens, values)
}

/// `embeddings.jsonl` rows for `(text_id, text)` items.
pub fn embedding_rows(items: &[(String, String)], dim: usize) -> Result<Vec<EmbeddingRow>> {
    items
        .iter()
        .map(|(id, text)| pseudo_embedding(id, text, dim).map(|t| EmbeddingRow::encode(&t)))
        .collect()
}

fn references_by_question(references: &[Reference]) -> HashMap<u64, &Reference> {
    references.iter().map(|r| (r.question_id, r)).collect()
}

fn overlap(generation: &Generation, reference: &Reference) -> f64 {
    let c = tokenize(&generation.text, TokenizerMode::Simple);
    let r = tokenize(&reference.text, TokenizerMode::Simple);
    rouge_n(&c, &r, 1).unwrap_or(0.0)
}

/// Reward-model stand-in: a reward that grows with unigram overlap with the
/// reference, plus seeded Gaussian noise.
pub fn generation_rewards(
    generations: &[Generation],
    references: &[Reference],
    noise: f64,
    seed: u64,
) -> Vec<GenerationReward> {
    let by_q = references_by_question(references);
    generations
        .iter()
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                derive_seed(seed, g.question_id),
                g.attempt as u64,
            ));
            let base = by_q.get(&g.question_id).map_or(0.0, |r| overlap(g, r));
            let eps: f64 = rng.sample(StandardNormal);
            GenerationReward {
                question_id: g.question_id,
                attempt: g.attempt,
                reward: 2.0 * base - 1.0 + noise * eps,
            }
        })
        .collect()
}

/// Answer-level rewards equal to `target + noise·N(0, 1)`.
pub fn answer_rewards(targets: &[(u64, f64)], noise: f64, seed: u64) -> Vec<AnswerReward> {
    targets
        .iter()
        .map(|&(id, target)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, id));
            let eps: f64 = rng.sample(StandardNormal);
            AnswerReward {
                id,
                reward: target + noise * eps,
            }
        })
        .collect()
}

/// Marks a generation relevant when its unigram F1 against the reference
/// reaches `threshold`.
pub fn relevance_labels(
    generations: &[Generation],
    references: &[Reference],
    threshold: f64,
) -> Vec<RelevanceLabel> {
    let by_q = references_by_question(references);
    generations
        .iter()
        .filter_map(|g| {
            by_q.get(&g.question_id).map(|r| RelevanceLabel {
                question_id: g.question_id,
                attempt: g.attempt,
                relevant: u8::from(overlap(g, r) >= threshold),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_posts, prepare, SplitConfig};
    use crate::metrics::bertscore_core;
    use crate::preprocess::{default_api_usage, run_preprocess};

    #[test]
    fn fixture_is_deterministic() {
        assert_eq!(posts_fixture(20, 3), posts_fixture(20, 3));
        assert_ne!(posts_fixture(20, 3), posts_fixture(20, 4));
    }

    #[test]
    fn kinds_survive_as_designed() {
        for seed in 0..5 {
            let fx = posts_fixture(50, seed);
            let parsed = parse_posts(&fx.to_xml()[..]).unwrap();
            assert_eq!(parsed.diagnostics.orphan_answers, 1);
            let ingested = prepare(
                parsed,
                &SplitConfig {
                    cutoff: Utc.with_ymd_and_hms(2021, 12, 14, 23, 59, 59).unwrap(),
                    tag_filter: vec!["python".into()],
                },
            );
            assert!(ingested.stats.validation_questions > 0 && ingested.stats.train_questions > 0);
            let questions: Vec<_> = ingested.questions.into_iter().map(|q| q.record).collect();
            let rules = default_api_usage().compile().unwrap();
            let out = run_preprocess(&questions, &ingested.answers, &rules);
            let kept: Vec<u64> = out.questions.iter().map(|q| q.id).collect();
            assert_eq!(kept, fx.expected_clean_ids(), "seed {seed}");
            assert!(out.stats.is_balanced());
            let d = &out.stats.questions_dropped;
            assert!(d.rich_content > 0 && d.not_api_usage > 0 && d.no_surviving_answers > 0);
        }
    }

    #[test]
    fn identical_texts_embed_identically() {
        let a = pseudo_embedding("a", "use pandas read_csv", 8).unwrap();
        let b = pseudo_embedding("b", "Use pandas, read_csv!", 8).unwrap();
        assert_eq!(a.values(), b.values());
        let s = bertscore_core(&a, &b).unwrap();
        assert!((s.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generations_cover_every_reference() {
        let refs = vec![
            Reference {
                question_id: 2,
                answer_id: 20,
                text: "use the sep argument".into(),
            },
            Reference {
                question_id: 1,
                answer_id: 10,
                text: "call loads on the string".into(),
            },
        ];
        let gens = model_generations(&refs, 10, 0.7, 1);
        assert_eq!(gens.len(), 20);
        assert_eq!(gens[0].question_id, 1);
        assert!(gens.iter().all(|g| !g.text.is_empty()));
        assert_eq!(gens, model_generations(&refs, 10, 0.7, 1));
        let labels = relevance_labels(&gens, &refs, 0.5);
        assert_eq!(labels.len(), 20);
        let rewards = generation_rewards(&gens, &refs, 0.1, 2);
        assert!(rewards.iter().all(|r| r.reward.is_finite()));
    }
}

//! Question/answer filtering and HTML-to-text conversion.

mod html;
mod rules;

use std::collections::{HashMap, HashSet};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use html::{reject_rich_content, sanitize_html};
pub use rules::{
    default_api_usage, parse_rulesets, select, CompiledRules, TaxonomyRuleSet, API_USAGE,
    DEFAULT_RULES_JSON,
};

use crate::ingest::{Answer, Question};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanQuestion {
    pub id: u64,
    pub title: String,
    pub body_text: String,
    pub tags: Vec<String>,
    #[serde(with = "crate::timestamp")]
    pub creation_date: DateTime<Utc>,
    pub accepted_answer_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanAnswer {
    pub id: u64,
    pub question_id: u64,
    pub body_text: String,
    pub votes: i64,
    pub is_accepted: bool,
    #[serde(with = "crate::timestamp")]
    pub creation_date: DateTime<Utc>,
}

/// Whether any rule matches the question title joined with its plain-text body.
pub fn classify_api_usage(question: &Question, rules: &CompiledRules) -> bool {
    let text = format!("{}\n{}", question.title, sanitize_html(&question.body_html));
    rules.is_match(&text)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDrops {
    pub rich_content: usize,
    pub not_api_usage: usize,
    pub no_surviving_answers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDrops {
    pub rich_content: usize,
    /// Clean answers whose question was dropped.
    pub question_dropped: usize,
    /// Answers referencing a question absent from the input.
    pub orphaned: usize,
}

/// Per-rule accounting. For each kind, `kept + Σ dropped = input`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub questions_in: usize,
    pub questions_kept: usize,
    pub questions_dropped: QuestionDrops,
    pub answers_in: usize,
    pub answers_kept: usize,
    pub answers_dropped: AnswerDrops,
}

impl PipelineStats {
    pub fn is_balanced(&self) -> bool {
        let q = &self.questions_dropped;
        let a = &self.answers_dropped;
        self.questions_kept + q.rich_content + q.not_api_usage + q.no_surviving_answers
            == self.questions_in
            && self.answers_kept + a.rich_content + a.question_dropped + a.orphaned
                == self.answers_in
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Keep,
    RichContent,
    NotApiUsage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Preprocessed {
    pub questions: Vec<CleanQuestion>,
    pub answers: Vec<CleanAnswer>,
    pub stats: PipelineStats,
}

/// Keeps API-usage questions without rich content that still have at least
/// one clean answer; keeps the clean answers of kept questions. Each
/// dropped record is counted under exactly one reason, checked in order:
/// rich content, not API usage, no surviving answers.
pub fn run_preprocess(
    questions: &[Question],
    answers: &[Answer],
    rules: &CompiledRules,
) -> Preprocessed {
    let verdicts: Vec<Verdict> = questions
        .par_iter()
        .map(|q| {
            if reject_rich_content(&q.body_html) {
                Verdict::RichContent
            } else if !classify_api_usage(q, rules) {
                Verdict::NotApiUsage
            } else {
                Verdict::Keep
            }
        })
        .collect();
    let answer_rich: Vec<bool> = answers
        .par_iter()
        .map(|a| reject_rich_content(&a.body_html))
        .collect();

    let known: HashSet<u64> = questions.iter().map(|q| q.id).collect();
    let mut surviving: HashMap<u64, usize> = HashMap::new();
    for (a, &rich) in answers.iter().zip(&answer_rich) {
        if !rich && known.contains(&a.question_id) {
            *surviving.entry(a.question_id).or_default() += 1;
        }
    }

    let mut stats = PipelineStats {
        questions_in: questions.len(),
        answers_in: answers.len(),
        ..Default::default()
    };
    let mut kept_ids = HashSet::new();
    let mut kept_questions = Vec::new();
    for (q, verdict) in questions.iter().zip(&verdicts) {
        match verdict {
            Verdict::RichContent => stats.questions_dropped.rich_content += 1,
            Verdict::NotApiUsage => stats.questions_dropped.not_api_usage += 1,
            Verdict::Keep if surviving.get(&q.id).copied().unwrap_or(0) == 0 => {
                stats.questions_dropped.no_surviving_answers += 1
            }
            Verdict::Keep => {
                kept_ids.insert(q.id);
                kept_questions.push(q);
            }
        }
    }

    let mut kept_answers = Vec::new();
    for (a, &rich) in answers.iter().zip(&answer_rich) {
        if !known.contains(&a.question_id) {
            stats.answers_dropped.orphaned += 1;
        } else if rich {
            stats.answers_dropped.rich_content += 1;
        } else if !kept_ids.contains(&a.question_id) {
            stats.answers_dropped.question_dropped += 1;
        } else {
            kept_answers.push(a);
        }
    }
    stats.questions_kept = kept_questions.len();
    stats.answers_kept = kept_answers.len();

    let questions = kept_questions
        .par_iter()
        .map(|q| CleanQuestion {
            id: q.id,
            title: q.title.clone(),
            body_text: sanitize_html(&q.body_html),
            tags: q.tags.clone(),
            creation_date: q.creation_date,
            accepted_answer_id: q.accepted_answer_id,
        })
        .collect();
    let answers = kept_answers
        .par_iter()
        .map(|a| CleanAnswer {
            id: a.id,
            question_id: a.question_id,
            body_text: sanitize_html(&a.body_html),
            votes: a.votes,
            is_accepted: a.is_accepted,
            creation_date: a.creation_date,
        })
        .collect();

    Preprocessed {
        questions,
        answers,
        stats,
    }
}

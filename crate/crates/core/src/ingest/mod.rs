//! Stack Exchange post ingestion: typed question/answer records, tag
//! filtering and the temporal train/validation split.

mod xml;

use std::collections::{BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use xml::{parse_posts, write_posts, ParseDiagnostics, ParsedPosts};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: u64,
    pub title: String,
    pub body_html: String,
    pub tags: Vec<String>,
    #[serde(with = "crate::timestamp")]
    pub creation_date: DateTime<Utc>,
    pub accepted_answer_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    pub id: u64,
    pub question_id: u64,
    pub body_html: String,
    pub votes: i64,
    pub is_accepted: bool,
    #[serde(with = "crate::timestamp")]
    pub creation_date: DateTime<Utc>,
}

/// Which side of the temporal cutoff a question falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitConfig {
    pub cutoff: DateTime<Utc>,
    /// Tags a question must carry (all of them). Empty keeps everything.
    pub tag_filter: Vec<String>,
}

/// Questions carrying `tag`, in input order.
pub fn filter_by_tag(questions: &[Question], tag: &str) -> Vec<Question> {
    questions
        .iter()
        .filter(|q| q.tags.iter().any(|t| t == tag))
        .cloned()
        .collect()
}

/// Splits on `creation_date > cutoff`: strictly later questions go to
/// validation, everything else (including the cutoff instant) to train.
pub fn temporal_split(
    questions: &[Question],
    cutoff: DateTime<Utc>,
) -> (Vec<Question>, Vec<Question>) {
    questions
        .iter()
        .cloned()
        .partition(|q| q.creation_date <= cutoff)
}

pub fn split_of(question: &Question, cutoff: DateTime<Utc>) -> Split {
    if question.creation_date > cutoff {
        Split::Validation
    } else {
        Split::Train
    }
}

/// A record tagged with the split of its question. Serializes flat, with
/// `split` as the last key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithSplit<T> {
    #[serde(flatten)]
    pub record: T,
    pub split: Split,
}

pub type SplitQuestion = WithSplit<Question>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub questions_parsed: usize,
    pub answers_parsed: usize,
    pub orphan_answers: usize,
    pub other_rows: usize,
    pub questions_after_tag_filter: usize,
    pub answers_after_tag_filter: usize,
    pub train_questions: usize,
    pub validation_questions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub questions: Vec<SplitQuestion>,
    pub answers: Vec<Answer>,
    pub stats: IngestStats,
}

/// Applies the tag filter and temporal split to parsed posts. Answers are
/// kept when their question survives and follow that question's split.
pub fn prepare(parsed: ParsedPosts, config: &SplitConfig) -> Ingested {
    let mut questions = parsed.questions;
    for tag in &config.tag_filter {
        questions = filter_by_tag(&questions, &tag.to_lowercase());
    }
    let kept: HashSet<u64> = questions.iter().map(|q| q.id).collect();
    let answers: Vec<Answer> = parsed
        .answers
        .into_iter()
        .filter(|a| kept.contains(&a.question_id))
        .collect();

    let questions: Vec<SplitQuestion> = questions
        .into_iter()
        .map(|record| {
            let split = split_of(&record, config.cutoff);
            WithSplit { record, split }
        })
        .collect();
    let validation = questions
        .iter()
        .filter(|q| q.split == Split::Validation)
        .count();

    let stats = IngestStats {
        questions_parsed: parsed.diagnostics.question_rows,
        answers_parsed: parsed.diagnostics.answer_rows,
        orphan_answers: parsed.diagnostics.orphan_answers,
        other_rows: parsed.diagnostics.other_rows,
        questions_after_tag_filter: questions.len(),
        answers_after_tag_filter: answers.len(),
        train_questions: questions.len() - validation,
        validation_questions: validation,
    };
    Ingested {
        questions,
        answers,
        stats,
    }
}

/// Marks `is_accepted` on answers from their parent's `accepted_answer_id`
/// and drops answers whose parent is absent. Returns the orphan count.
pub fn link_answers(questions: &[Question], answers: &mut Vec<Answer>) -> usize {
    let accepted: HashSet<(u64, u64)> = questions
        .iter()
        .filter_map(|q| q.accepted_answer_id.map(|a| (q.id, a)))
        .collect();
    let ids: BTreeSet<u64> = questions.iter().map(|q| q.id).collect();
    let before = answers.len();
    answers.retain(|a| ids.contains(&a.question_id));
    for a in answers.iter_mut() {
        a.is_accepted = accepted.contains(&(a.question_id, a.id));
    }
    before - answers.len()
}

/// Splits a Stack Exchange `Tags` attribute (`<a><b>` or `|a|b|`) into
/// lowercase tag names.
pub fn parse_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

use serde::{Deserialize, Serialize};

use super::QuestionVotes;

/// `⌈log2(1 + votes)⌉`, plus one for an accepted answer; `-1` for any
/// negative vote count regardless of acceptance.
pub fn contrast_score(votes: i64, accepted: bool) -> i32 {
    if votes < 0 {
        return -1;
    }
    // smallest s with 2^s >= 1 + votes
    let base = (votes as u64 + 1).next_power_of_two().trailing_zeros() as i32;
    base + i32::from(accepted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastScore {
    pub answer_id: u64,
    pub score: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredAnswer {
    pub answer_id: u64,
    pub score: i32,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionScores {
    pub question_id: u64,
    pub answers: Vec<ScoredAnswer>,
}

pub fn score_question(q: &QuestionVotes) -> QuestionScores {
    QuestionScores {
        question_id: q.question_id,
        answers: q
            .answers
            .iter()
            .map(|a| ScoredAnswer {
                answer_id: a.answer_id,
                score: contrast_score(a.votes, a.accepted),
                accepted: a.accepted,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSource {
    Human,
    Generated,
}

/// A preference label: `preferred_id` should be rewarded above `other_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContrastPair {
    pub question_id: u64,
    pub preferred_id: u64,
    pub other_id: u64,
    pub preferred_score: i32,
    pub other_score: i32,
    pub source: PairSource,
}

/// The top-scoring answer. Ties go to the accepted answer, then to the
/// smaller answer id.
pub fn best_answer(q: &QuestionScores) -> Option<&ScoredAnswer> {
    q.answers.iter().min_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(b.accepted.cmp(&a.accepted))
            .then(a.answer_id.cmp(&b.answer_id))
    })
}

/// Pairs each question's best answer with every strictly lower-scored
/// answer. Questions with a single answer and equal-score answers yield
/// nothing. Output is ordered by question id, then other answer id.
pub fn build_pairs(questions: &[QuestionScores]) -> Vec<ContrastPair> {
    let mut pairs = Vec::new();
    for q in questions.iter().filter(|q| q.answers.len() >= 2) {
        let Some(best) = best_answer(q) else { continue };
        let mut others: Vec<&ScoredAnswer> = q
            .answers
            .iter()
            .filter(|a| a.answer_id != best.answer_id && a.score < best.score)
            .collect();
        others.sort_by_key(|a| a.answer_id);
        pairs.extend(others.into_iter().map(|other| ContrastPair {
            question_id: q.question_id,
            preferred_id: best.answer_id,
            other_id: other.answer_id,
            preferred_score: best.score,
            other_score: other.score,
            source: PairSource::Human,
        }));
    }
    pairs.sort_by_key(|p| (p.question_id, p.other_id));
    pairs
}

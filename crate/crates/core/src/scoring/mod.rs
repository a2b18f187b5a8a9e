//! Reward-model training targets derived from community votes.
//!
//! Two transforms are provided: bounded regression targets
//! ([`regression_raw`] then [`regression_scale`]) and integer log-scale
//! contrast scores that yield preference pairs ([`contrast_score`],
//! [`build_pairs`]). [`inject_synthetic`] adds generated answers for
//! single-answer questions, and [`validation`] holds the pairwise loss and
//! sign accuracy used to check a trained reward model's outputs.

mod contrast;
mod regression;
mod synthetic;
pub mod validation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use contrast::{
    best_answer, build_pairs, contrast_score, score_question, ContrastPair, ContrastScore,
    PairSource, QuestionScores, ScoredAnswer,
};
pub use regression::{regression_raw, regression_scale, tukey_fences, Fences, RegressionScore};
pub use synthetic::{inject_synthetic, SyntheticAnswer, SyntheticBatch, SyntheticConfig};
pub use validation::{contrastive_loss, sign_accuracy};

use crate::preprocess::CleanAnswer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerVotes {
    pub answer_id: u64,
    pub votes: i64,
    pub accepted: bool,
}

/// All answers of one question with their votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionVotes {
    pub question_id: u64,
    pub answers: Vec<AnswerVotes>,
}

/// Groups answers by question, ordered by question id then answer id.
pub fn group_votes<'a, I>(answers: I) -> Vec<QuestionVotes>
where
    I: IntoIterator<Item = &'a CleanAnswer>,
{
    let mut grouped: BTreeMap<u64, Vec<AnswerVotes>> = BTreeMap::new();
    for a in answers {
        grouped.entry(a.question_id).or_default().push(AnswerVotes {
            answer_id: a.id,
            votes: a.votes,
            accepted: a.is_accepted,
        });
    }
    grouped
        .into_iter()
        .map(|(question_id, mut answers)| {
            answers.sort_by_key(|a| a.answer_id);
            QuestionVotes {
                question_id,
                answers,
            }
        })
        .collect()
}

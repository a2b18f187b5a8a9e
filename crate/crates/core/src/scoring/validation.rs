//! Checks on reward-model outputs: the pairwise preference loss and sign
//! accuracy against regression targets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{ContrastPair, RegressionScore};
use crate::{Error, Result};

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Mean over pairs of `-ln σ(preferred - other)`.
pub fn contrastive_loss(preferred_rewards: &[f64], other_rewards: &[f64]) -> Result<f64> {
    if preferred_rewards.len() != other_rewards.len() {
        return Err(Error::LengthMismatch {
            left: preferred_rewards.len(),
            right: other_rewards.len(),
        });
    }
    if preferred_rewards.is_empty() {
        return Err(Error::invalid("no reward pairs"));
    }
    let total: f64 = preferred_rewards
        .iter()
        .zip(other_rewards)
        .map(|(p, o)| softplus(-(p - o)))
        .sum();
    Ok(total / preferred_rewards.len() as f64)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Fraction of positions where reward and target have the same sign
/// (zero counts as its own sign).
pub fn sign_accuracy(rewards: &[f64], targets: &[f64]) -> Result<f64> {
    if rewards.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: rewards.len(),
            right: targets.len(),
        });
    }
    if rewards.is_empty() {
        return Err(Error::invalid("no rewards"));
    }
    let hits = rewards
        .iter()
        .zip(targets)
        .filter(|(r, t)| sign(**r) == sign(**t))
        .count();
    Ok(hits as f64 / rewards.len() as f64)
}

/// One `rewards.jsonl` row: a reward model's output for an answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerReward {
    pub id: u64,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardValidation {
    pub scored_answers: usize,
    pub sign_accuracy: Option<f64>,
    pub pairs: usize,
    pub contrastive_loss: Option<f64>,
}

/// Joins reward rows to regression targets and preference pairs by answer id.
pub fn validate_rewards(
    rewards: &[AnswerReward],
    scores: &[RegressionScore],
    pairs: &[ContrastPair],
) -> Result<RewardValidation> {
    let by_id: HashMap<u64, f64> = rewards.iter().map(|r| (r.id, r.reward)).collect();
    let mut missing: Vec<u64> = scores
        .iter()
        .map(|s| s.answer_id)
        .chain(pairs.iter().flat_map(|p| [p.preferred_id, p.other_id]))
        .filter(|id| !by_id.contains_key(id))
        .collect();
    missing.sort_unstable();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::MissingRows {
            kind: "reward",
            ids: missing.iter().map(u64::to_string).collect(),
        });
    }

    let sign_accuracy = if scores.is_empty() {
        None
    } else {
        let r: Vec<f64> = scores.iter().map(|s| by_id[&s.answer_id]).collect();
        let t: Vec<f64> = scores.iter().map(|s| s.scaled).collect();
        Some(sign_accuracy(&r, &t)?)
    };
    let contrastive_loss = if pairs.is_empty() {
        None
    } else {
        let p: Vec<f64> = pairs.iter().map(|p| by_id[&p.preferred_id]).collect();
        let o: Vec<f64> = pairs.iter().map(|p| by_id[&p.other_id]).collect();
        Some(contrastive_loss(&p, &o)?)
    };
    Ok(RewardValidation {
        scored_answers: scores.len(),
        sign_accuracy,
        pairs: pairs.len(),
        contrastive_loss,
    })
}

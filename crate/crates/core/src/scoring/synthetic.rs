use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ContrastPair, PairSource, QuestionScores, RegressionScore};
use crate::metrics::Generation;
use crate::{Error, Result};

/// Contrast score given to generated answers in pairs.
pub const SYNTHETIC_CONTRAST_SCORE: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub mean: f64,
    pub stddev: f64,
    /// Id assigned to the first generated answer; later ones count up.
    pub first_id: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mean: -0.5,
            stddev: 0.1,
            first_id: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticAnswer {
    pub id: u64,
    pub question_id: u64,
    pub attempt: u32,
    pub text: String,
    /// Regression target after clipping to [-1, 1].
    pub target: f64,
    pub source: PairSource,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyntheticBatch {
    pub answers: Vec<SyntheticAnswer>,
    pub scores: Vec<RegressionScore>,
    pub pairs: Vec<ContrastPair>,
}

/// Adds generated answers to single-answer questions.
///
/// Each generation draws a regression target from `N(mean, stddev²)`
/// (clipped to [-1, 1]) in input order from a generator seeded with
/// `config.seed`, and yields a pair preferring the question's human answer.
/// Every question passed in must have exactly one human answer.
pub fn inject_synthetic(
    questions: &[QuestionScores],
    generations: &[Generation],
    config: &SyntheticConfig,
) -> Result<SyntheticBatch> {
    if !(config.stddev > 0.0 && config.stddev.is_finite() && config.mean.is_finite()) {
        return Err(Error::invalid(format!(
            "synthetic target distribution needs finite mean and stddev > 0, got N({}, {}²)",
            config.mean, config.stddev
        )));
    }
    if config.first_id == 0 {
        return Err(Error::invalid("synthetic answer ids must be positive"));
    }
    let mut human = HashMap::new();
    for q in questions {
        if q.answers.len() != 1 {
            return Err(Error::invalid(format!(
                "question {} has {} human answers; synthetic answers need exactly one",
                q.question_id,
                q.answers.len()
            )));
        }
        human.insert(q.question_id, q.answers[0]);
    }

    let normal = Normal::new(config.mean, config.stddev)
        .map_err(|e| Error::invalid(format!("normal distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut batch = SyntheticBatch::default();

    for (offset, g) in generations.iter().enumerate() {
        let preferred = human
            .get(&g.question_id)
            .ok_or(Error::UnknownQuestion(g.question_id))?;
        let id = config.first_id + offset as u64;
        let sample = normal.sample(&mut rng);
        let target = sample.clamp(-1.0, 1.0);
        batch.answers.push(SyntheticAnswer {
            id,
            question_id: g.question_id,
            attempt: g.attempt,
            text: g.text.clone(),
            target,
            source: PairSource::Generated,
        });
        batch.scores.push(RegressionScore {
            answer_id: id,
            raw: sample,
            scaled: target,
            is_outlier: false,
        });
        batch.pairs.push(ContrastPair {
            question_id: g.question_id,
            preferred_id: preferred.answer_id,
            other_id: id,
            preferred_score: preferred.score,
            other_score: SYNTHETIC_CONTRAST_SCORE,
            source: PairSource::Generated,
        });
    }
    Ok(batch)
}

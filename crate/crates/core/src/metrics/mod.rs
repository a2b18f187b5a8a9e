//! Per-(question, attempt) similarity scores between generated answers and
//! the question's reference answer.

mod bertscore;
mod bleu;
mod embeddings;
mod rouge;
mod tokenize;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bertscore::{bertscore_core, BertScore, EmbeddingTable};
pub use bleu::{bleu_stats, sentence_bleu, BleuStats};
pub use embeddings::{
    index_embeddings, validate_embeddings, EmbeddingIndex, EmbeddingRow, SchemaViolation,
};
pub use rouge::rouge_n;
pub use tokenize::{tokenize, TokenizedText, TokenizerMode};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sacrebleu,
    Rouge1,
    Rouge2,
    Bertscore,
    RegReward,
    ContrReward,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Sacrebleu,
        Metric::Rouge1,
        Metric::Rouge2,
        Metric::Bertscore,
        Metric::RegReward,
        Metric::ContrReward,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sacrebleu => "sacrebleu",
            Metric::Rouge1 => "rouge1",
            Metric::Rouge2 => "rouge2",
            Metric::Bertscore => "bertscore",
            Metric::RegReward => "reg_reward",
            Metric::ContrReward => "contr_reward",
        }
    }

    /// Reward columns are unbounded; the text metrics live in [0, 1].
    pub fn is_reward(self) -> bool {
        matches!(self, Metric::RegReward | Metric::ContrReward)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

/// One `generations.jsonl` row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generation {
    pub question_id: u64,
    pub attempt: u32,
    pub text: String,
}

/// One `references.jsonl` row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub question_id: u64,
    pub answer_id: u64,
    pub text: String,
}

/// One per-generation reward row, as produced by a reward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationReward {
    pub question_id: u64,
    pub attempt: u32,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricValue {
    pub question_id: u64,
    pub attempt: u32,
    pub metric: Metric,
    pub value: f64,
}

/// Text id under which a generation's embeddings are looked up.
pub fn generation_text_id(question_id: u64, attempt: u32) -> String {
    format!("gen:{question_id}:{attempt}")
}

/// Text id under which a reference answer's embeddings are looked up.
pub fn reference_text_id(question_id: u64) -> String {
    format!("ref:{question_id}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub metrics: Vec<Metric>,
    pub bleu_max_n: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            metrics: vec![Metric::Sacrebleu, Metric::Rouge1, Metric::Rouge2],
            bleu_max_n: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreInputs<'a> {
    pub generations: &'a [Generation],
    pub references: &'a [Reference],
    pub embeddings: Option<&'a EmbeddingIndex>,
    pub reg_rewards: Option<&'a [GenerationReward]>,
    pub contr_rewards: Option<&'a [GenerationReward]>,
}

type RewardIndex = HashMap<(u64, u32), f64>;

fn reward_index(
    rows: Option<&[GenerationReward]>,
    metric: Metric,
    generations: &[Generation],
) -> Result<RewardIndex> {
    let rows = rows.ok_or_else(|| {
        Error::invalid(format!(
            "{metric} requested but no reward rows were supplied"
        ))
    })?;
    let index: RewardIndex = rows
        .iter()
        .map(|r| ((r.question_id, r.attempt), r.reward))
        .collect();
    let missing: Vec<String> = generations
        .iter()
        .filter(|g| !index.contains_key(&(g.question_id, g.attempt)))
        .map(|g| format!("{}/{}", g.question_id, g.attempt))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingRows {
            kind: metric.as_str(),
            ids: missing,
        });
    }
    Ok(index)
}

/// Scores every generation against its question's reference.
///
/// Emits one value per (question, attempt, requested metric), sorted by
/// question id, attempt, then metric. Missing references, embeddings or
/// reward rows are reported before any scoring happens.
pub fn score_all(inputs: &ScoreInputs<'_>, options: &ScoreOptions) -> Result<Vec<MetricValue>> {
    let metrics: BTreeSet<Metric> = options.metrics.iter().copied().collect();
    if metrics.is_empty() {
        return Err(Error::invalid("no metrics requested"));
    }
    if options.bleu_max_n == 0 {
        return Err(Error::invalid("BLEU max order must be at least 1"));
    }

    let mut seen = BTreeSet::new();
    for g in inputs.generations {
        if !seen.insert((g.question_id, g.attempt)) {
            return Err(Error::invalid(format!(
                "duplicate generation {}/{}",
                g.question_id, g.attempt
            )));
        }
    }
    let mut references: HashMap<u64, &Reference> = HashMap::new();
    for r in inputs.references {
        if references.insert(r.question_id, r).is_some() {
            return Err(Error::invalid(format!(
                "more than one reference for question {}",
                r.question_id
            )));
        }
    }
    if let Some(g) = inputs
        .generations
        .iter()
        .find(|g| !references.contains_key(&g.question_id))
    {
        return Err(Error::MissingReference(g.question_id));
    }

    let embeddings = if metrics.contains(&Metric::Bertscore) {
        let index = inputs
            .embeddings
            .ok_or_else(|| Error::invalid("bertscore requested but no embeddings were supplied"))?;
        let mut missing = BTreeSet::new();
        for g in inputs.generations {
            for id in [
                generation_text_id(g.question_id, g.attempt),
                reference_text_id(g.question_id),
            ] {
                if !index.contains_key(&id) {
                    missing.insert(id);
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingRows {
                kind: "embedding",
                ids: missing.into_iter().collect(),
            });
        }
        Some(index)
    } else {
        None
    };
    let reg = if metrics.contains(&Metric::RegReward) {
        Some(reward_index(
            inputs.reg_rewards,
            Metric::RegReward,
            inputs.generations,
        )?)
    } else {
        None
    };
    let contr = if metrics.contains(&Metric::ContrReward) {
        Some(reward_index(
            inputs.contr_rewards,
            Metric::ContrReward,
            inputs.generations,
        )?)
    } else {
        None
    };

    let need_bleu = metrics.contains(&Metric::Sacrebleu);
    let need_rouge = metrics.contains(&Metric::Rouge1) || metrics.contains(&Metric::Rouge2);

    let per_generation: Vec<Vec<MetricValue>> = inputs
        .generations
        .par_iter()
        .map(|g| -> Result<Vec<MetricValue>> {
            let reference = references[&g.question_id];
            let (bleu_c, bleu_r) = if need_bleu {
                (
                    Some(tokenize(&g.text, TokenizerMode::Bleu13a)),
                    Some(tokenize(&reference.text, TokenizerMode::Bleu13a)),
                )
            } else {
                (None, None)
            };
            let (rouge_c, rouge_r) = if need_rouge {
                (
                    Some(tokenize(&g.text, TokenizerMode::Simple)),
                    Some(tokenize(&reference.text, TokenizerMode::Simple)),
                )
            } else {
                (None, None)
            };
            let key = (g.question_id, g.attempt);
            let mut row = Vec::with_capacity(metrics.len());
            for &metric in &metrics {
                let value = match metric {
                    Metric::Sacrebleu => sentence_bleu(
                        bleu_c.as_ref().unwrap(),
                        bleu_r.as_ref().unwrap(),
                        options.bleu_max_n,
                    )?,
                    Metric::Rouge1 => {
                        rouge_n(rouge_c.as_ref().unwrap(), rouge_r.as_ref().unwrap(), 1)?
                    }
                    Metric::Rouge2 => {
                        rouge_n(rouge_c.as_ref().unwrap(), rouge_r.as_ref().unwrap(), 2)?
                    }
                    Metric::Bertscore => {
                        let index = embeddings.unwrap();
                        let cand = &index[&generation_text_id(g.question_id, g.attempt)];
                        let refr = &index[&reference_text_id(g.question_id)];
                        bertscore_core(cand, refr)?.f1
                    }
                    Metric::RegReward => reg.as_ref().unwrap()[&key],
                    Metric::ContrReward => contr.as_ref().unwrap()[&key],
                };
                row.push(MetricValue {
                    question_id: g.question_id,
                    attempt: g.attempt,
                    metric,
                    value,
                });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut values: Vec<MetricValue> = per_generation.into_iter().flatten().collect();
    values.sort_by_key(|v| (v.question_id, v.attempt, v.metric));
    Ok(values)
}

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::metrics::{Metric, MetricValue};
use crate::{Error, Result};

/// One `relevance.jsonl` row: whether an attempt was judged useful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceLabel {
    pub question_id: u64,
    pub attempt: u32,
    /// 1 for useful, 0 for not useful.
    pub relevant: u8,
}

/// Mean reciprocal rank of the first relevant item within the top `k`.
///
/// Each query is a ranked list of relevance flags. A query whose first
/// relevant item sits at 1-based position `r <= k` contributes `1 / r`;
/// otherwise it contributes 0.
pub fn mrr_at_k<Q: AsRef<[bool]>>(queries: &[Q], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if queries.is_empty() {
        return Err(Error::invalid("MRR over an empty query set"));
    }
    let mut total = 0.0;
    for q in queries {
        let labels = q.as_ref();
        if labels.is_empty() {
            return Err(Error::invalid("MRR query without ranked items"));
        }
        if let Some(pos) = labels.iter().take(k).position(|&rel| rel) {
            total += 1.0 / (pos + 1) as f64;
        }
    }
    Ok(total / queries.len() as f64)
}

/// Orders attempts by value, highest first; equal values keep ascending
/// attempt order.
pub fn rank_attempts(scored: &[(u32, f64)]) -> Vec<u32> {
    let mut order = scored.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().map(|(a, _)| a).collect()
}

/// MRR@k for each metric present in `values`, ranking each labeled
/// question's attempts by that metric.
///
/// Every labeled question must have a value for each labeled attempt and a
/// label for each scored attempt; gaps are reported together.
pub fn mrr_by_metric(
    values: &[MetricValue],
    labels: &[RelevanceLabel],
    k: usize,
) -> Result<BTreeMap<Metric, f64>> {
    let mut label_index: BTreeMap<u64, BTreeMap<u32, bool>> = BTreeMap::new();
    for l in labels {
        if l.relevant > 1 {
            return Err(Error::invalid(format!(
                "relevance for {}/{} must be 0 or 1, got {}",
                l.question_id, l.attempt, l.relevant
            )));
        }
        if label_index
            .entry(l.question_id)
            .or_default()
            .insert(l.attempt, l.relevant == 1)
            .is_some()
        {
            return Err(Error::invalid(format!(
                "duplicate relevance label for {}/{}",
                l.question_id, l.attempt
            )));
        }
    }
    if label_index.is_empty() {
        return Err(Error::invalid("no relevance labels"));
    }

    let mut scored: BTreeMap<Metric, HashMap<u64, Vec<(u32, f64)>>> = BTreeMap::new();
    for v in values
        .iter()
        .filter(|v| label_index.contains_key(&v.question_id))
    {
        scored
            .entry(v.metric)
            .or_default()
            .entry(v.question_id)
            .or_default()
            .push((v.attempt, v.value));
    }

    let mut out = BTreeMap::new();
    for (metric, by_question) in scored {
        let mut missing = BTreeSet::new();
        let mut queries = Vec::with_capacity(label_index.len());
        for (q, q_labels) in &label_index {
            let attempts = by_question.get(q).map(Vec::as_slice).unwrap_or(&[]);
            let have: BTreeSet<u32> = attempts.iter().map(|(a, _)| *a).collect();
            for a in q_labels.keys().filter(|a| !have.contains(a)) {
                missing.insert(format!("{metric}:{q}/{a}"));
            }
            for a in have.iter().filter(|a| !q_labels.contains_key(a)) {
                missing.insert(format!("label:{q}/{a}"));
            }
            queries.push(
                rank_attempts(attempts)
                    .into_iter()
                    .map(|a| q_labels.get(&a).copied().unwrap_or(false))
                    .collect::<Vec<bool>>(),
            );
        }
        if !missing.is_empty() {
            return Err(Error::MissingRows {
                kind: "relevance",
                ids: missing.into_iter().collect(),
            });
        }
        out.insert(metric, mrr_at_k(&queries, k)?);
    }
    Ok(out)
}

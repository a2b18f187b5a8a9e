//! Greedy cosine matching between candidate and reference token embeddings.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Token embeddings for one text, row-major `tokens × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub text_id: String,
    dim: usize,
    tokens: Vec<String>,
    values: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(
        text_id: impl Into<String>,
        dim: usize,
        tokens: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let text_id = text_id.into();
        if dim == 0 {
            return Err(Error::invalid(format!(
                "{text_id}: embedding dim must be positive"
            )));
        }
        if values.len() != tokens.len() * dim {
            return Err(Error::invalid(format!(
                "{text_id}: {} values for {} tokens × {dim}",
                values.len(),
                tokens.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "{text_id}: non-finite embedding value"
            )));
        }
        Ok(Self {
            text_id,
            dim,
            tokens,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    fn unit_rows(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|row| {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|v| v / norm).collect()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision is the mean over candidate tokens of their best cosine match
/// in the reference, recall the same from the reference side. Zero-norm
/// vectors have similarity 0 with everything. No IDF weighting, no
/// baseline rescaling.
pub fn bertscore_core(cand: &EmbeddingTable, reference: &EmbeddingTable) -> Result<BertScore> {
    if cand.dim != reference.dim {
        return Err(Error::invalid(format!(
            "embedding dims differ: {} ({}) vs {} ({})",
            cand.dim, cand.text_id, reference.dim, reference.text_id
        )));
    }
    if cand.tokens.is_empty() || reference.tokens.is_empty() {
        return Err(Error::invalid(format!(
            "empty token list in {} or {}",
            cand.text_id, reference.text_id
        )));
    }
    let c = cand.unit_rows();
    let r = reference.unit_rows();

    let mut row_max = vec![f64::NEG_INFINITY; c.len()];
    let mut col_max = vec![f64::NEG_INFINITY; r.len()];
    for (i, ci) in c.iter().enumerate() {
        for (j, rj) in r.iter().enumerate() {
            let sim: f64 = ci.iter().zip(rj).map(|(a, b)| a * b).sum();
            row_max[i] = row_max[i].max(sim);
            col_max[j] = col_max[j].max(sim);
        }
    }
    let precision = row_max.iter().sum::<f64>() / row_max.len() as f64;
    let recall = col_max.iter().sum::<f64>() / col_max.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(BertScore {
        precision,
        recall,
        f1,
    })
}

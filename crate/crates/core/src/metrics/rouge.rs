use std::collections::HashMap;

use super::TokenizedText;
use crate::{Error, Result};

/// Rouge-N F1 over n-gram multisets. Zero when either side has no n-grams.
pub fn rouge_n(candidate: &TokenizedText, reference: &TokenizedText, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("Rouge order must be at least 1"));
    }
    let cand = ngram_counts(&candidate.tokens, n);
    let refs = ngram_counts(&reference.tokens, n);
    let cand_total: usize = cand.values().sum();
    let ref_total: usize = refs.values().sum();
    if cand_total == 0 || ref_total == 0 {
        return Ok(0.0);
    }
    let overlap: usize = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    let precision = overlap as f64 / cand_total as f64;
    let recall = overlap as f64 / ref_total as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

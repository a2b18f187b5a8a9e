use std::collections::HashMap;

use super::TokenizedText;
use crate::{Error, Result};

/// Clipped n-gram match counts and n-gram totals per order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub candidate_len: usize,
    pub reference_len: usize,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

pub fn bleu_stats(candidate: &TokenizedText, reference: &TokenizedText, max_n: usize) -> BleuStats {
    let mut matches = Vec::with_capacity(max_n);
    let mut totals = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let cand = ngram_counts(&candidate.tokens, n);
        let refs = ngram_counts(&reference.tokens, n);
        matches.push(
            cand.iter()
                .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
                .sum(),
        );
        totals.push(candidate.tokens.len().saturating_sub(n - 1));
    }
    BleuStats {
        matches,
        totals,
        candidate_len: candidate.len(),
        reference_len: reference.len(),
    }
}

/// Sentence-level BLEU in [0, 1].
///
/// Geometric mean of clipped n-gram precisions for orders `1..=max_n`
/// times the brevity penalty `exp(1 - |ref| / |cand|)` (when the candidate
/// is shorter). Smoothing: the k-th order (counting from the lowest) with
/// zero matches gets precision `1 / (2^k * total)`. Orders for which the
/// candidate has no n-grams at all are left out of the mean. An empty
/// candidate scores 0.
pub fn sentence_bleu(
    candidate: &TokenizedText,
    reference: &TokenizedText,
    max_n: usize,
) -> Result<f64> {
    if max_n == 0 {
        return Err(Error::invalid("BLEU max order must be at least 1"));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let stats = bleu_stats(candidate, reference, max_n);

    let mut log_sum = 0.0;
    let mut order = 0;
    let mut smooth = 1.0;
    for (&m, &t) in stats.matches.iter().zip(&stats.totals) {
        if t == 0 {
            break;
        }
        order += 1;
        let p = if m == 0 {
            smooth *= 2.0;
            1.0 / (smooth * t as f64)
        } else {
            m as f64 / t as f64
        };
        log_sum += p.ln();
    }

    let (c, r) = (stats.candidate_len as f64, stats.reference_len as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok(bp * (log_sum / order as f64).exp())
}

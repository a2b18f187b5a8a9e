use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::{derive_seed, mean, sample_stddev};
use crate::{Error, Result};

/// Mean of a sample with its percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stddev: f64,
}

pub(crate) fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "confidence must lie strictly between 0 and 1, got {confidence}"
        )))
    }
}

/// Indices of the lower and upper percentile order statistics among `b`
/// sorted replicate values. No interpolation: the interval endpoints are
/// always replicate values.
pub(crate) fn percentile_indices(b: usize, confidence: f64) -> (usize, usize) {
    let tail = (1.0 - confidence) / 2.0;
    let lo = (tail * b as f64 + 1e-9).floor() as usize;
    let hi = ((1.0 - tail) * b as f64 - 1e-9).ceil() as usize;
    let hi = hi.saturating_sub(1).min(b - 1);
    (lo.min(hi), hi)
}

/// Percentile interval over already computed replicate statistics.
pub(crate) fn percentile_interval(mut replicates: Vec<f64>, confidence: f64) -> (f64, f64) {
    replicates.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_indices(replicates.len(), confidence);
    (replicates[lo], replicates[hi])
}

/// Sample mean and stddev of `values`, plus a percentile bootstrap interval
/// from `resamples` resamples drawn with replacement.
///
/// Resample `i` draws from its own generator seeded from `(seed, i)`, so the
/// result does not depend on how the work is spread over threads.
pub fn mean_with_bootstrap_ci(
    values: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapSummary> {
    if values.is_empty() {
        return Err(Error::invalid("bootstrap of an empty sample"));
    }
    if resamples == 0 {
        return Err(Error::invalid("bootstrap needs at least one resample"));
    }
    check_confidence(confidence)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "bootstrap sample contains a non-finite value",
        ));
    }

    let n = values.len();
    let replicates: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.gen_range(0..n)];
            }
            sum / n as f64
        })
        .collect();
    let (ci_low, ci_high) = percentile_interval(replicates, confidence);
    Ok(BootstrapSummary {
        mean: mean(values),
        ci_low,
        ci_high,
        stddev: sample_stddev(values),
    })
}

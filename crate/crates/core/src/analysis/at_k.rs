use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bootstrap::{check_confidence, percentile_interval};
use crate::metrics::{Metric, MetricValue};
use crate::stats::{derive_seed, mean};
use crate::{Error, Result};

fn check_row(row: &[f64], k: usize) -> Result<()> {
    if row.is_empty() {
        return Err(Error::invalid("metric@k of an empty row"));
    }
    if k == 0 || k > row.len() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            row.len()
        )));
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("metric@k row contains a non-finite value"));
    }
    Ok(())
}

/// Expected maximum of `k` values drawn without replacement from `row`.
///
/// With the row sorted ascending, the i-th smallest value (1-based) is the
/// maximum of a random k-subset with probability C(i-1, k-1) / C(n, k).
/// Those weights are generated from the top down (the largest value wins
/// with probability k/n) so nothing overflows for long rows. `k = 1`
/// returns the arithmetic mean and `k = n` the maximum.
pub fn metric_at_k(row: &[f64], k: usize) -> Result<f64> {
    check_row(row, k)?;
    let n = row.len();
    if k == 1 {
        return Ok(mean(row));
    }
    if k == n {
        return Ok(row.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut weight = k as f64 / n as f64;
    let mut total = 0.0;
    for i in (k..=n).rev() {
        total += weight * sorted[i - 1];
        weight *= (i - k) as f64 / (i - 1) as f64;
    }
    Ok(total)
}

/// Monte Carlo estimate of [`metric_at_k`] from `samples` seeded random
/// k-subsets.
pub fn metric_at_k_monte_carlo(row: &[f64], k: usize, samples: usize, seed: u64) -> Result<f64> {
    check_row(row, k)?;
    if samples == 0 {
        return Err(Error::invalid(
            "Monte Carlo estimate needs at least one sample",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        total += sample(&mut rng, row.len(), k)
            .iter()
            .map(|i| row[i])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(total / samples as f64)
}

/// Question × attempt values of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptMatrix {
    pub metric: Metric,
    pub question_ids: Vec<u64>,
    /// Row per question (ascending id), column per attempt (ascending).
    pub values: Vec<Vec<f64>>,
}

impl AttemptMatrix {
    /// Collects the values of `metric`. Every question must carry the same
    /// set of attempts; gaps are reported as `question/attempt` ids.
    pub fn from_values(values: &[MetricValue], metric: Metric) -> Result<Self> {
        let mut cells: BTreeMap<u64, BTreeMap<u32, f64>> = BTreeMap::new();
        for v in values.iter().filter(|v| v.metric == metric) {
            if cells
                .entry(v.question_id)
                .or_default()
                .insert(v.attempt, v.value)
                .is_some()
            {
                return Err(Error::invalid(format!(
                    "duplicate {metric} value for {}/{}",
                    v.question_id, v.attempt
                )));
            }
        }
        if cells.is_empty() {
            return Err(Error::invalid(format!("no {metric} values")));
        }
        let attempts: BTreeSet<u32> = cells.values().flat_map(|m| m.keys().copied()).collect();
        let missing: Vec<String> = cells
            .iter()
            .flat_map(|(q, row)| {
                attempts
                    .iter()
                    .filter(|a| !row.contains_key(a))
                    .map(move |a| format!("{q}/{a}"))
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingRows {
                kind: metric.as_str(),
                ids: missing,
            });
        }
        Ok(Self {
            metric,
            question_ids: cells.keys().copied().collect(),
            values: cells
                .into_values()
                .map(|row| row.into_values().collect())
                .collect(),
        })
    }

    pub fn n_attempts(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn n_questions(&self) -> usize {
        self.values.len()
    }
}

/// One point of a metric@k curve, averaged over questions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub expected_max: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Settings for [`at_k_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveOptions {
    pub k_max: usize,
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

/// Mean over questions of the per-question metric@k for k = 1..=k_max
/// (capped at the attempt count), with a percentile bootstrap interval
/// from resampling questions.
///
/// The same question resamples are reused across k, so the interval
/// bounds move together along the curve.
pub fn at_k_curve(matrix: &AttemptMatrix, options: &CurveOptions) -> Result<Vec<CurvePoint>> {
    if options.k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    if options.resamples == 0 {
        return Err(Error::invalid("bootstrap needs at least one resample"));
    }
    check_confidence(options.confidence)?;
    let k_max = options.k_max.min(matrix.n_attempts());
    let nq = matrix.n_questions();

    let draws: Vec<Vec<usize>> = (0..options.resamples as u64)
        .map(|i| {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, i));
            (0..nq).map(|_| rng.gen_range(0..nq)).collect()
        })
        .collect();

    (1..=k_max)
        .map(|k| {
            let per_question = matrix
                .values
                .iter()
                .map(|row| metric_at_k(row, k))
                .collect::<Result<Vec<f64>>>()?;
            let replicates = draws
                .iter()
                .map(|idx| idx.iter().map(|&i| per_question[i]).sum::<f64>() / nq as f64)
                .collect();
            let (ci_low, ci_high) = percentile_interval(replicates, options.confidence);
            Ok(CurvePoint {
                k,
                expected_max: mean(&per_question),
                ci_low,
                ci_high,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_value_row() {
        assert_eq!(metric_at_k(&[0.0, 1.0], 1).unwrap(), 0.5);
        assert_eq!(metric_at_k(&[0.0, 1.0], 2).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_middle_k() {
        // subsets of {1,2,3,4} of size 2: maxima 2,3,4,3,4,4 -> 20/6
        let e = metric_at_k(&[3.0, 1.0, 4.0, 2.0], 2).unwrap();
        assert!((e - 20.0 / 6.0).abs() < 1e-15);
        // size 3: maxima 3,4,4,4 -> 15/4
        let e = metric_at_k(&[3.0, 1.0, 4.0, 2.0], 3).unwrap();
        assert!((e - 3.75).abs() < 1e-15);
    }

    #[test]
    fn long_rows_do_not_overflow() {
        let row: Vec<f64> = (0..2000).map(|i| i as f64 / 2000.0).collect();
        let e = metric_at_k(&row, 1000).unwrap();
        assert!(e.is_finite() && e > 0.99 && e < 1.0);
    }

    #[test]
    fn k_out_of_range() {
        assert!(metric_at_k(&[1.0, 2.0], 0).is_err());
        assert!(metric_at_k(&[1.0, 2.0], 3).is_err());
        assert!(metric_at_k(&[], 1).is_err());
    }

    #[test]
    fn monte_carlo_agrees() {
        let row = [0.1, 0.9, 0.4, 0.3, 0.7];
        let exact = metric_at_k(&row, 3).unwrap();
        let mc = metric_at_k_monte_carlo(&row, 3, 50_000, 5).unwrap();
        assert!((exact - mc).abs() < 0.01, "{exact} vs {mc}");
    }

    fn values(q: u64, row: &[f64]) -> Vec<MetricValue> {
        row.iter()
            .enumerate()
            .map(|(a, &value)| MetricValue {
                question_id: q,
                attempt: a as u32,
                metric: Metric::Rouge1,
                value,
            })
            .collect()
    }

    #[test]
    fn matrix_and_curve() {
        let mut all = values(2, &[0.2, 0.4, 0.6]);
        all.extend(values(1, &[0.0, 1.0, 0.5]));
        let m = AttemptMatrix::from_values(&all, Metric::Rouge1).unwrap();
        assert_eq!(m.question_ids, vec![1, 2]);
        assert_eq!(m.values[0], vec![0.0, 1.0, 0.5]);
        let curve = at_k_curve(
            &m,
            &CurveOptions {
                k_max: 10,
                resamples: 200,
                confidence: 0.95,
                seed: 9,
            },
        )
        .unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve[2].expected_max, 0.8);
        for w in curve.windows(2) {
            assert!(w[1].expected_max >= w[0].expected_max);
        }
        for p in &curve {
            assert!(p.ci_low <= p.expected_max + 1e-12 && p.expected_max <= p.ci_high + 1e-12);
        }
    }

    #[test]
    fn matrix_reports_gaps() {
        let mut all = values(1, &[0.0, 1.0, 0.5]);
        all.extend(values(2, &[0.2]));
        let err = AttemptMatrix::from_values(&all, Metric::Rouge1).unwrap_err();
        assert!(err.to_string().contains("2/1") && err.to_string().contains("2/2"));
    }
}

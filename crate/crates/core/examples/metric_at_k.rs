//! Expected best-of-k metric values, exact and sampled, and a bootstrapped
//! curve over questions.

use cqa_eval::analysis::{
    at_k_curve, metric_at_k, metric_at_k_monte_carlo, AttemptMatrix, CurveOptions,
};
use cqa_eval::metrics::{Metric, MetricValue};

fn main() -> cqa_eval::Result<()> {
    let row = [0.1, 0.7, 0.3, 0.5, 0.2];
    for k in 1..=row.len() {
        println!(
            "k={k} exact {:.4} sampled {:.4}",
            metric_at_k(&row, k)?,
            metric_at_k_monte_carlo(&row, k, 20_000, 1)?
        );
    }

    let values: Vec<MetricValue> = (0..20u64)
        .flat_map(|q| {
            (0..8u32).map(move |a| MetricValue {
                question_id: q,
                attempt: a,
                metric: Metric::Rouge1,
                value: ((q * 7 + a as u64 * 13) % 17) as f64 / 17.0,
            })
        })
        .collect();
    let matrix = AttemptMatrix::from_values(&values, Metric::Rouge1)?;
    let options = CurveOptions {
        k_max: 8,
        resamples: 500,
        confidence: 0.95,
        seed: 3,
    };
    for p in at_k_curve(&matrix, &options)? {
        println!(
            "k={} {:.4} [{:.4}, {:.4}]",
            p.k, p.expected_max, p.ci_low, p.ci_high
        );
    }
    Ok(())
}

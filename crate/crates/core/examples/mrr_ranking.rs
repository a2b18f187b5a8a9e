//! Mean reciprocal rank of the first relevant generation when generations
//! are ranked by a metric.

use cqa_eval::analysis::{mrr_at_k, mrr_by_metric, RelevanceLabel};
use cqa_eval::metrics::{Metric, MetricValue};

fn main() -> cqa_eval::Result<()> {
    println!(
        "{:.6}",
        mrr_at_k(&[vec![true, false], vec![false, false, true]], 10)?
    );

    let scores = [[0.9, 0.2, 0.5], [0.1, 0.8, 0.3]];
    let relevant = [[false, false, true], [false, true, false]];
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for q in 0..2 {
        for a in 0..3 {
            values.push(MetricValue {
                question_id: q as u64,
                attempt: a as u32,
                metric: Metric::Rouge1,
                value: scores[q][a],
            });
            labels.push(RelevanceLabel {
                question_id: q as u64,
                attempt: a as u32,
                relevant: u8::from(relevant[q][a]),
            });
        }
    }
    for (metric, mrr) in mrr_by_metric(&values, &labels, 10)? {
        println!("{metric}: {mrr:.4}");
    }
    Ok(())
}

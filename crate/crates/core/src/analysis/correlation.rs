use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{Metric, MetricValue};
use crate::{Error, Result};

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid(
            "correlation needs at least two observations",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation with a constant sequence"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::invalid("correlation input contains NaN"));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Symmetric metric-by-metric Spearman matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub metrics: Vec<Metric>,
    pub rho: Vec<Vec<f64>>,
}

/// One cell of a correlation matrix in long form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub m1: Metric,
    pub m2: Metric,
    pub rho: f64,
}

impl CorrelationMatrix {
    pub fn get(&self, m1: Metric, m2: Metric) -> Option<f64> {
        let i = self.metrics.iter().position(|&m| m == m1)?;
        let j = self.metrics.iter().position(|&m| m == m2)?;
        Some(self.rho[i][j])
    }

    /// All cells, row-major in metric order.
    pub fn entries(&self) -> Vec<CorrelationEntry> {
        let mut out = Vec::with_capacity(self.metrics.len().pow(2));
        for (i, &m1) in self.metrics.iter().enumerate() {
            for (j, &m2) in self.metrics.iter().enumerate() {
                out.push(CorrelationEntry {
                    m1,
                    m2,
                    rho: self.rho[i][j],
                });
            }
        }
        out
    }
}

/// Spearman correlation between every pair of metrics over all
/// (question, attempt) cells.
///
/// Every metric must be present for every cell; absent cells are listed in
/// the error as `metric:question/attempt`.
pub fn correlation_matrix(values: &[MetricValue]) -> Result<CorrelationMatrix> {
    let mut by_metric: BTreeMap<Metric, BTreeMap<(u64, u32), f64>> = BTreeMap::new();
    for v in values {
        if by_metric
            .entry(v.metric)
            .or_default()
            .insert((v.question_id, v.attempt), v.value)
            .is_some()
        {
            return Err(Error::invalid(format!(
                "duplicate {} value for {}/{}",
                v.metric, v.question_id, v.attempt
            )));
        }
    }
    if by_metric.is_empty() {
        return Err(Error::invalid("no metric values"));
    }
    let cells: BTreeSet<(u64, u32)> = by_metric.values().flat_map(|m| m.keys().copied()).collect();
    let mut missing = Vec::new();
    for (metric, column) in &by_metric {
        for cell in cells.iter().filter(|c| !column.contains_key(c)) {
            missing.push(format!("{metric}:{}/{}", cell.0, cell.1));
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingRows {
            kind: "metric",
            ids: missing,
        });
    }

    let metrics: Vec<Metric> = by_metric.keys().copied().collect();
    let columns: Vec<Vec<f64>> = by_metric
        .into_values()
        .map(|c| c.into_values().collect())
        .collect();
    let m = metrics.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| spearman(&columns[i], &columns[j]))
        .collect::<Result<Vec<f64>>>()?;

    let mut rho = vec![vec![1.0; m]; m];
    for (&(i, j), r) in pairs.iter().zip(upper) {
        rho[i][j] = r;
        rho[j][i] = r;
    }
    if m == 1 {
        // A single column still has to be rankable.
        spearman(&columns[0], &columns[0])?;
    }
    Ok(CorrelationMatrix { metrics, rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]),
            vec![2.0, 3.5, 3.5, 1.0]
        );
    }

    #[test]
    fn perfect_monotone() {
        let xs = [0.3, 1.2, -4.0, 9.0, 2.2];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.exp()).collect();
        assert_eq!(spearman(&xs, &ys).unwrap(), 1.0);
        let neg: Vec<f64> = xs.iter().map(|x| -x * 3.0).collect();
        assert_eq!(spearman(&xs, &neg).unwrap(), -1.0);
    }

    #[test]
    fn tied_example() {
        // ranks x: 1, 2.5, 2.5, 4; y: 1, 3, 2, 4
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        let expected = 4.5 / (4.5f64 * 5.0).sqrt();
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }

    #[test]
    fn constant_is_undefined() {
        assert!(matches!(
            spearman(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::Undefined(_))
        ));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    fn cell(q: u64, a: u32, metric: Metric, value: f64) -> MetricValue {
        MetricValue {
            question_id: q,
            attempt: a,
            metric,
            value,
        }
    }

    #[test]
    fn matrix_is_symmetric_with_unit_diagonal() {
        let mut values = Vec::new();
        for i in 0..20u32 {
            let x = (i as f64 * 1.7).sin();
            values.push(cell(1, i, Metric::Rouge1, x));
            values.push(cell(1, i, Metric::Rouge2, x * x));
            values.push(cell(1, i, Metric::Sacrebleu, x));
        }
        let m = correlation_matrix(&values).unwrap();
        assert_eq!(
            m.metrics,
            vec![Metric::Sacrebleu, Metric::Rouge1, Metric::Rouge2]
        );
        for i in 0..3 {
            assert_eq!(m.rho[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m.rho[i][j], m.rho[j][i]);
            }
        }
        assert_eq!(m.get(Metric::Sacrebleu, Metric::Rouge1), Some(1.0));
        assert_eq!(m.entries().len(), 9);
    }

    #[test]
    fn matrix_lists_missing_cells() {
        let values = vec![
            cell(1, 0, Metric::Rouge1, 0.1),
            cell(1, 1, Metric::Rouge1, 0.2),
            cell(1, 0, Metric::Rouge2, 0.1),
        ];
        let err = correlation_matrix(&values).unwrap_err();
        assert!(err.to_string().contains("rouge2:1/1"));
    }
}

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    at_k_curve, ks_two_sample, mann_whitney_u, mean_with_bootstrap_ci, metric_at_k, mrr_by_metric,
    spearman, AttemptMatrix, CurveOptions, CurvePoint, RelevanceLabel, TestResult,
};
use crate::metrics::{Metric, MetricValue};
use crate::scoring::validation::RewardValidation;
use crate::stats::{derive_seed, mean};
use crate::{Error, Result};

use super::AnalysisParams;

/// Everything `analyze` computes, as stored in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub confidence: f64,
    pub bootstrap_samples: usize,
    pub k_max: usize,
    pub mrr_k: usize,
    pub models: Vec<ModelReport>,
    pub comparisons: Vec<Comparison>,
    pub reward_validation: Option<RewardValidation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub label: String,
    pub questions: usize,
    pub attempts: usize,
    pub metrics: Vec<MetricSummary>,
    /// Present when relevance labels were supplied.
    pub mrr: Option<Vec<MrrEntry>>,
    pub correlations: Vec<CorrelationRow>,
}

/// Per-question means of one metric: their mean, stddev and bootstrap
/// interval, plus the metric@k value at the largest k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stddev: f64,
    pub at_k_max: CurvePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrrEntry {
    pub metric: Metric,
    pub mrr: f64,
}

/// Spearman correlation between two metrics of one model; absent when a
/// metric is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub model: String,
    pub m1: Metric,
    pub m2: Metric,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonLevel {
    /// Per-question mean over attempts.
    Mean,
    /// Per-question metric@k.
    AtK,
}

/// Two-sample tests between two models' per-question values of a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: Metric,
    pub model_a: String,
    pub model_b: String,
    pub level: ComparisonLevel,
    pub k: Option<usize>,
    pub ks: TestResult,
    /// Absent when every value is tied.
    pub mann_whitney: Option<TestResult>,
}

/// One `curves.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub model: String,
    pub metric: Metric,
    pub k: usize,
    pub expected_max: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub(super) struct ModelInput {
    pub label: String,
    pub values: Vec<MetricValue>,
    pub relevance: Option<Vec<RelevanceLabel>>,
}

pub(super) struct AnalysisOutput {
    pub report: AnalysisReport,
    pub curves: Vec<CurveRow>,
    pub correlations: Vec<CorrelationRow>,
}

struct MetricWork {
    matrix: AttemptMatrix,
    question_means: Vec<f64>,
    summary: MetricSummary,
    curve: Vec<CurvePoint>,
}

fn metric_work(
    values: &[MetricValue],
    metric: Metric,
    params: &AnalysisParams,
    seed: u64,
) -> Result<MetricWork> {
    let matrix = AttemptMatrix::from_values(values, metric)?;
    let question_means: Vec<f64> = matrix.values.iter().map(|row| mean(row)).collect();
    let boot = mean_with_bootstrap_ci(
        &question_means,
        params.bootstrap_samples,
        params.confidence,
        derive_seed(seed, 0),
    )?;
    let curve = at_k_curve(
        &matrix,
        &CurveOptions {
            k_max: params.k_max,
            resamples: params.bootstrap_samples,
            confidence: params.confidence,
            seed: derive_seed(seed, 1),
        },
    )?;
    let at_k_max = *curve.last().expect("curve has at least k = 1");
    Ok(MetricWork {
        summary: MetricSummary {
            metric,
            mean: boot.mean,
            ci_low: boot.ci_low,
            ci_high: boot.ci_high,
            stddev: boot.stddev,
            at_k_max,
        },
        matrix,
        question_means,
        curve,
    })
}

fn correlations(label: &str, works: &[MetricWork]) -> Result<Vec<CorrelationRow>> {
    // Flatten each matrix row-major; all metrics share the same cells.
    let columns: Vec<Vec<f64>> = works
        .iter()
        .map(|w| w.matrix.values.iter().flatten().copied().collect())
        .collect();
    if let Some(first) = works.first() {
        let same_cells = |w: &MetricWork| {
            w.matrix.question_ids == first.matrix.question_ids
                && w.matrix.n_attempts() == first.matrix.n_attempts()
        };
        if let Some(w) = works.iter().find(|w| !same_cells(w)) {
            return Err(Error::invalid(format!(
                "{label}: {} and {} cover different question/attempt cells",
                first.summary.metric, w.summary.metric
            )));
        }
    }
    let mut rows = Vec::with_capacity(works.len() * works.len());
    for (i, a) in works.iter().enumerate() {
        for (j, b) in works.iter().enumerate() {
            let rho = match spearman(&columns[i], &columns[j]) {
                Ok(_) if i == j => Some(1.0),
                Ok(r) => Some(r),
                Err(Error::Undefined(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(CorrelationRow {
                model: label.to_string(),
                m1: a.summary.metric,
                m2: b.summary.metric,
                rho,
            });
        }
    }
    Ok(rows)
}

fn compare(a: &[f64], b: &[f64]) -> Result<(TestResult, Option<TestResult>)> {
    let ks = ks_two_sample(a, b)?;
    let mw = match mann_whitney_u(a, b) {
        Ok(r) => Some(r),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((ks, mw))
}

pub(super) fn analyze(
    models: &[ModelInput],
    params: &AnalysisParams,
    seed: u64,
    reward_validation: Option<RewardValidation>,
) -> Result<AnalysisOutput> {
    let mut reports = Vec::with_capacity(models.len());
    let mut curves = Vec::new();
    let mut all_correlations = Vec::new();
    let mut per_model_work = Vec::with_capacity(models.len());

    for (model_idx, model) in models.iter().enumerate() {
        let metrics: Vec<Metric> = model
            .values
            .iter()
            .map(|v| v.metric)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if metrics.is_empty() {
            return Err(Error::invalid(format!("{}: no metric values", model.label)));
        }
        let model_seed = derive_seed(seed, model_idx as u64);
        let works = metrics
            .par_iter()
            .map(|&m| metric_work(&model.values, m, params, derive_seed(model_seed, m as u64)))
            .collect::<Result<Vec<_>>>()?;

        let mrr = match &model.relevance {
            Some(labels) => Some(
                mrr_by_metric(&model.values, labels, params.mrr_k)?
                    .into_iter()
                    .map(|(metric, mrr)| MrrEntry { metric, mrr })
                    .collect(),
            ),
            None => None,
        };
        let correlations = correlations(&model.label, &works)?;
        for w in &works {
            curves.extend(w.curve.iter().map(|p| CurveRow {
                model: model.label.clone(),
                metric: w.summary.metric,
                k: p.k,
                expected_max: p.expected_max,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
            }));
        }
        all_correlations.extend(correlations.iter().cloned());
        reports.push(ModelReport {
            label: model.label.clone(),
            questions: works[0].matrix.n_questions(),
            attempts: works[0].matrix.n_attempts(),
            metrics: works.iter().map(|w| w.summary.clone()).collect(),
            mrr,
            correlations,
        });
        per_model_work.push(works);
    }

    let mut comparisons = Vec::new();
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            for wa in &per_model_work[i] {
                let Some(wb) = per_model_work[j]
                    .iter()
                    .find(|w| w.summary.metric == wa.summary.metric)
                else {
                    continue;
                };
                let (ks, mw) = compare(&wa.question_means, &wb.question_means)?;
                comparisons.push(Comparison {
                    metric: wa.summary.metric,
                    model_a: models[i].label.clone(),
                    model_b: models[j].label.clone(),
                    level: ComparisonLevel::Mean,
                    k: None,
                    ks,
                    mann_whitney: mw,
                });
                let k = params
                    .k_max
                    .min(wa.matrix.n_attempts())
                    .min(wb.matrix.n_attempts());
                let at_k = |w: &MetricWork| -> Result<Vec<f64>> {
                    w.matrix
                        .values
                        .iter()
                        .map(|row| metric_at_k(row, k))
                        .collect()
                };
                let (ks, mw) = compare(&at_k(wa)?, &at_k(wb)?)?;
                comparisons.push(Comparison {
                    metric: wa.summary.metric,
                    model_a: models[i].label.clone(),
                    model_b: models[j].label.clone(),
                    level: ComparisonLevel::AtK,
                    k: Some(k),
                    ks,
                    mann_whitney: mw,
                });
            }
        }
    }

    Ok(AnalysisOutput {
        report: AnalysisReport {
            confidence: params.confidence,
            bootstrap_samples: params.bootstrap_samples,
            k_max: params.k_max,
            mrr_k: params.mrr_k,
            models: reports,
            comparisons,
            reward_validation,
        },
        curves,
        correlations: all_correlations,
    })
}

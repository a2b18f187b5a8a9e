use std::fmt::Write;

use super::analyze::{AnalysisReport, ComparisonLevel};
use crate::io::Meta;

fn num(x: f64) -> String {
    format!("{x:.4}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), num)
}

/// Renders an analysis report as Markdown. The metadata record goes into a
/// leading HTML comment.
pub fn render_markdown(report: &AnalysisReport, meta: &Meta) -> String {
    let mut md = String::new();
    let meta_json = serde_json::to_string(meta).expect("metadata serializes");
    let _ = writeln!(md, "<!-- meta: {meta_json} -->");
    let _ = writeln!(md, "# Evaluation report\n");
    let _ = writeln!(
        md,
        "Intervals: {:.0}% percentile bootstrap over questions, {} resamples. metric@k up to k = {}; MRR@{}.\n",
        report.confidence * 100.0,
        report.bootstrap_samples,
        report.k_max,
        report.mrr_k
    );

    for model in &report.models {
        let _ = writeln!(md, "## {}\n", model.label);
        let _ = writeln!(
            md,
            "{} questions x {} attempts.\n",
            model.questions, model.attempts
        );
        let _ = writeln!(
            md,
            "| metric | mean | ci low | ci high | stddev | k | metric@k | @k ci low | @k ci high |"
        );
        let _ = writeln!(md, "|---|---|---|---|---|---|---|---|---|");
        for m in &model.metrics {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                m.metric,
                num(m.mean),
                num(m.ci_low),
                num(m.ci_high),
                num(m.stddev),
                m.at_k_max.k,
                num(m.at_k_max.expected_max),
                num(m.at_k_max.ci_low),
                num(m.at_k_max.ci_high)
            );
        }
        md.push('\n');

        if let Some(mrr) = &model.mrr {
            let _ = writeln!(md, "| metric | MRR@{} |", report.mrr_k);
            let _ = writeln!(md, "|---|---|");
            for e in mrr {
                let _ = writeln!(md, "| {} | {} |", e.metric, num(e.mrr));
            }
            md.push('\n');
        }

        let metrics: Vec<_> = model.metrics.iter().map(|m| m.metric).collect();
        if metrics.len() > 1 {
            let _ = writeln!(md, "Spearman correlation:\n");
            let header: Vec<String> = metrics.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(md, "| | {} |", header.join(" | "));
            let _ = writeln!(md, "|---|{}", "---|".repeat(metrics.len()));
            for &m1 in &metrics {
                let cells: Vec<String> = metrics
                    .iter()
                    .map(|&m2| {
                        model
                            .correlations
                            .iter()
                            .find(|c| c.m1 == m1 && c.m2 == m2)
                            .map_or_else(|| "n/a".to_string(), |c| opt(c.rho))
                    })
                    .collect();
                let _ = writeln!(md, "| {m1} | {} |", cells.join(" | "));
            }
            md.push('\n');
        }
    }

    if !report.comparisons.is_empty() {
        let _ = writeln!(md, "## Model comparisons\n");
        let _ = writeln!(md, "Two-sided tests on per-question values.\n");
        let _ = writeln!(md, "| metric | models | level | KS D | KS p | U | U p |");
        let _ = writeln!(md, "|---|---|---|---|---|---|---|");
        for c in &report.comparisons {
            let level = match (c.level, c.k) {
                (ComparisonLevel::Mean, _) => "mean".to_string(),
                (ComparisonLevel::AtK, Some(k)) => format!("@{k}"),
                (ComparisonLevel::AtK, None) => "@k".to_string(),
            };
            let _ = writeln!(
                md,
                "| {} | {} vs {} | {level} | {} | {} | {} | {} |",
                c.metric,
                c.model_a,
                c.model_b,
                num(c.ks.statistic),
                num(c.ks.p_value),
                opt(c.mann_whitney.map(|r| r.statistic)),
                opt(c.mann_whitney.map(|r| r.p_value))
            );
        }
        md.push('\n');
    }

    if let Some(rv) = &report.reward_validation {
        let _ = writeln!(md, "## Reward validation\n");
        let _ = writeln!(md, "| check | n | value |");
        let _ = writeln!(md, "|---|---|---|");
        let _ = writeln!(
            md,
            "| sign accuracy | {} | {} |",
            rv.scored_answers,
            opt(rv.sign_accuracy)
        );
        let _ = writeln!(
            md,
            "| pairwise loss | {} | {} |",
            rv.pairs,
            opt(rv.contrastive_loss)
        );
        md.push('\n');
    }
    md
}

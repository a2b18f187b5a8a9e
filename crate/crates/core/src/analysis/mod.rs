//! Aggregation of metric values: bootstrap intervals, metric@k curves,
//! MRR@k, Spearman correlation and two-sample significance tests.

mod at_k;
mod bootstrap;
mod correlation;
mod mrr;
mod significance;

pub use at_k::{
    at_k_curve, metric_at_k, metric_at_k_monte_carlo, AttemptMatrix, CurveOptions, CurvePoint,
};
pub use bootstrap::{mean_with_bootstrap_ci, BootstrapSummary};
pub use correlation::{
    average_ranks, correlation_matrix, pearson, spearman, CorrelationEntry, CorrelationMatrix,
};
pub use mrr::{mrr_at_k, mrr_by_metric, rank_attempts, RelevanceLabel};
pub use significance::{kolmogorov_sf, ks_two_sample, mann_whitney_u, TestResult};

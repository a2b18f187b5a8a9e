use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ingest::Split;
use crate::metrics::Metric;

use super::{PipelineError, Stage};

/// Run configuration, read from a single JSON document.
///
/// Every field has a default, so `{}` is a valid configuration. Paths in
/// `paths` override the default location (`out_dir/<file name>`) of a
/// file role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub log_level: Option<LogLevel>,
    pub paths: BTreeMap<String, PathBuf>,
    pub ingest: IngestParams,
    pub preprocess: PreprocessParams,
    pub scoring: ScoringParams,
    pub synthetic: SyntheticParams,
    pub metrics: MetricsParams,
    pub analysis: AnalysisParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            threads: None,
            log_level: None,
            paths: BTreeMap::new(),
            ingest: IngestParams::default(),
            preprocess: PreprocessParams::default(),
            scoring: ScoringParams::default(),
            synthetic: SyntheticParams::default(),
            metrics: MetricsParams::default(),
            analysis: AnalysisParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

impl LogLevel {
    pub fn filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "error" => Some(LogLevel::Error),
            "warn" => Some(LogLevel::Warn),
            "info" => Some(LogLevel::Info),
            "debug" => Some(LogLevel::Debug),
            _ => None,
        }
    }
}

/// Source format for `ingest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostsFormat {
    /// A Stack Exchange `Posts.xml` dump (`posts` role).
    Xml,
    /// Question and answer records as JSON Lines (`raw_questions` and
    /// `raw_answers` roles).
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestParams {
    pub format: PostsFormat,
    /// Tag a question must carry; `null` keeps every question.
    pub tag: Option<String>,
    /// Questions created strictly after this instant form the validation split.
    #[serde(with = "crate::timestamp")]
    pub cutoff: DateTime<Utc>,
}

impl Default for IngestParams {
    fn default() -> Self {
        Self {
            format: PostsFormat::Xml,
            tag: Some("python".into()),
            cutoff: crate::timestamp::parse("2021-12-14T23:59:59.999Z").expect("valid literal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessParams {
    /// Ruleset file; the bundled API-usage rules when absent.
    pub ruleset: Option<PathBuf>,
    pub category: String,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            ruleset: None,
            category: crate::preprocess::API_USAGE.into(),
        }
    }
}

/// Which questions the scoring stages use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSelection {
    Train,
    Validation,
    All,
}

impl SplitSelection {
    pub fn accepts(self, split: Split) -> bool {
        match self {
            SplitSelection::All => true,
            SplitSelection::Train => split == Split::Train,
            SplitSelection::Validation => split == Split::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringParams {
    pub split: SplitSelection,
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            split: SplitSelection::Train,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticParams {
    pub mean: f64,
    pub stddev: f64,
    /// First synthetic answer id; one past the largest human answer id
    /// when absent.
    pub first_id: Option<u64>,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            mean: -0.5,
            stddev: 0.1,
            first_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsParams {
    pub metrics: Vec<Metric>,
    pub bleu_max_n: usize,
}

impl Default for MetricsParams {
    fn default() -> Self {
        Self {
            metrics: vec![Metric::Sacrebleu, Metric::Rouge1, Metric::Rouge2],
            bleu_max_n: 4,
        }
    }
}

/// Another model's metric values to compare against the primary ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareModel {
    pub label: String,
    pub metric_values: PathBuf,
    #[serde(default)]
    pub relevance: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisParams {
    pub bootstrap_samples: usize,
    pub confidence: f64,
    pub k_max: usize,
    pub mrr_k: usize,
    /// Label of the model behind the `metric_values` role.
    pub label: String,
    pub compare: Vec<CompareModel>,
    /// Validate answer-level rewards against regression targets and pairs.
    pub reward_validation: bool,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            bootstrap_samples: 1000,
            confidence: 0.95,
            k_max: 10,
            mrr_k: 10,
            label: "model".into(),
            compare: Vec::new(),
            reward_validation: false,
        }
    }
}

/// Default file name of every file role.
pub const ROLE_FILES: &[(&str, &str)] = &[
    ("posts", "Posts.xml"),
    ("raw_questions", "raw_questions.jsonl"),
    ("raw_answers", "raw_answers.jsonl"),
    ("questions", "questions.jsonl"),
    ("answers", "answers.jsonl"),
    ("ingest_stats", "ingest_stats.json"),
    ("clean_questions", "clean_questions.jsonl"),
    ("clean_answers", "clean_answers.jsonl"),
    ("preprocess_stats", "preprocess_stats.json"),
    ("regression_scores", "regression_scores.jsonl"),
    ("pairs", "pairs.jsonl"),
    ("references", "references.jsonl"),
    ("synthetic_generations", "synthetic_generations.jsonl"),
    ("synthetic_answers", "synthetic_answers.jsonl"),
    ("synthetic_scores", "synthetic_scores.jsonl"),
    ("synthetic_pairs", "synthetic_pairs.jsonl"),
    ("generations", "generations.jsonl"),
    ("embeddings", "embeddings.jsonl"),
    ("reg_rewards", "reg_rewards.jsonl"),
    ("contr_rewards", "contr_rewards.jsonl"),
    ("metric_values", "metric_values.jsonl"),
    ("relevance", "relevance.jsonl"),
    ("answer_rewards", "answer_rewards.jsonl"),
    ("report", "report.json"),
    ("curves", "curves.csv"),
    ("correlations", "correlations.csv"),
    ("report_md", "report.md"),
];

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| PipelineError::config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for role in self.paths.keys() {
            if !ROLE_FILES.iter().any(|(r, _)| r == role) {
                return Err(PipelineError::config(format!("unknown path role {role:?}")));
            }
        }
        if self.threads == Some(0) {
            return Err(PipelineError::config("threads must be at least 1"));
        }
        if let Some(tag) = &self.ingest.tag {
            if tag.trim().is_empty() {
                return Err(PipelineError::config("ingest.tag must not be empty"));
            }
        }
        let s = &self.synthetic;
        if !(s.stddev > 0.0 && s.stddev.is_finite() && s.mean.is_finite()) {
            return Err(PipelineError::config(
                "synthetic.stddev must be positive and synthetic.mean finite",
            ));
        }
        if s.first_id == Some(0) {
            return Err(PipelineError::config("synthetic.first_id must be positive"));
        }
        if self.metrics.metrics.is_empty() {
            return Err(PipelineError::config("metrics.metrics must not be empty"));
        }
        if self.metrics.bleu_max_n == 0 {
            return Err(PipelineError::config(
                "metrics.bleu_max_n must be at least 1",
            ));
        }
        let a = &self.analysis;
        if a.bootstrap_samples == 0 {
            return Err(PipelineError::config(
                "analysis.bootstrap_samples must be at least 1",
            ));
        }
        if !(a.confidence > 0.0 && a.confidence < 1.0) {
            return Err(PipelineError::config(
                "analysis.confidence must lie in (0, 1)",
            ));
        }
        if a.k_max == 0 || a.mrr_k == 0 {
            return Err(PipelineError::config(
                "analysis.k_max and analysis.mrr_k must be at least 1",
            ));
        }
        let mut labels = vec![a.label.as_str()];
        for c in &a.compare {
            if labels.contains(&c.label.as_str()) {
                return Err(PipelineError::config(format!(
                    "duplicate model label {:?}",
                    c.label
                )));
            }
            labels.push(&c.label);
        }
        Ok(())
    }

    /// Whether `role` has an explicitly configured path.
    pub fn is_explicit(&self, role: &str) -> bool {
        self.paths.contains_key(role)
    }

    /// Resolved location of a file role.
    pub fn path(&self, role: &str) -> PathBuf {
        if let Some(p) = self.paths.get(role) {
            return p.clone();
        }
        let file = ROLE_FILES
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, f)| *f)
            .unwrap_or_else(|| panic!("unknown role {role}"));
        self.out_dir.join(file)
    }

    /// Points the primary input of `stage` (or a named role) at `path`.
    pub fn set_input(
        &mut self,
        stage: Stage,
        key: Option<&str>,
        path: &Path,
    ) -> Result<(), PipelineError> {
        let role = match key {
            Some(k) => k.to_string(),
            None => stage.primary_input(self).to_string(),
        };
        if !stage.accepted_inputs().contains(&role.as_str()) {
            return Err(PipelineError::usage(format!(
                "{} does not read a {role:?} input",
                stage.name()
            )));
        }
        self.paths.insert(role, path.to_path_buf());
        Ok(())
    }

    /// Sets the output directory, or one named output file.
    pub fn set_output(
        &mut self,
        stage: Stage,
        key: Option<&str>,
        path: &Path,
    ) -> Result<(), PipelineError> {
        match key {
            None => self.out_dir = path.to_path_buf(),
            Some(role) => {
                if !stage.outputs().contains(&role) {
                    return Err(PipelineError::usage(format!(
                        "{} does not write a {role:?} output",
                        stage.name()
                    )));
                }
                self.paths.insert(role.to_string(), path.to_path_buf());
            }
        }
        Ok(())
    }
}

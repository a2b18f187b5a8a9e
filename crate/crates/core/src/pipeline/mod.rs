//! File-based pipeline stages behind the `cqa-eval` binary.
//!
//! Each [`Stage`] reads its declared input files, computes, and writes its
//! outputs together once everything has succeeded. Every output starts
//! with a [`Meta`](crate::io::Meta) record carrying the tool version, the
//! stage name, the seed and the sha256 digest of each input, so identical
//! configuration and inputs give byte-identical files.

mod analyze;
mod cli;
mod config;
mod report;
mod stages;

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

pub use analyze::{
    AnalysisReport, Comparison, ComparisonLevel, CorrelationRow, CurveRow, MetricSummary,
    ModelReport, MrrEntry,
};
pub use cli::main_with_args;
pub use config::{
    AnalysisParams, CompareModel, IngestParams, LogLevel, MetricsParams, PostsFormat,
    PreprocessParams, RunConfig, ScoringParams, SplitSelection, SyntheticParams, ROLE_FILES,
};
pub use report::render_markdown;

use crate::metrics::Metric;

/// Pipeline subcommands, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Ingest,
    Preprocess,
    ScoreRegression,
    ScoreContrastive,
    Inject,
    ScoreMetrics,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::ScoreRegression,
        Stage::ScoreContrastive,
        Stage::Inject,
        Stage::ScoreMetrics,
        Stage::Analyze,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::ScoreRegression => "score-regression",
            Stage::ScoreContrastive => "score-contrastive",
            Stage::Inject => "inject",
            Stage::ScoreMetrics => "score-metrics",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Input role that an unnamed `--input PATH` refers to.
    pub fn primary_input(self, config: &RunConfig) -> &'static str {
        match self {
            Stage::Ingest => match config.ingest.format {
                PostsFormat::Xml => "posts",
                PostsFormat::Jsonl => "raw_questions",
            },
            Stage::Preprocess => "questions",
            Stage::ScoreRegression | Stage::ScoreContrastive => "clean_answers",
            Stage::Inject => "synthetic_generations",
            Stage::ScoreMetrics => "generations",
            Stage::Analyze => "metric_values",
            Stage::Report => "report",
        }
    }

    /// Every input role the stage can read.
    pub fn accepted_inputs(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &["posts", "raw_questions", "raw_answers"],
            Stage::Preprocess => &["questions", "answers"],
            Stage::ScoreRegression | Stage::ScoreContrastive => &["clean_answers"],
            Stage::Inject => &["clean_answers", "synthetic_generations"],
            Stage::ScoreMetrics => &[
                "generations",
                "references",
                "embeddings",
                "reg_rewards",
                "contr_rewards",
            ],
            Stage::Analyze => &[
                "metric_values",
                "relevance",
                "answer_rewards",
                "regression_scores",
                "pairs",
            ],
            Stage::Report => &["report"],
        }
    }

    /// Input roles that must exist for this configuration.
    pub fn inputs(self, config: &RunConfig) -> Vec<&'static str> {
        match self {
            Stage::Ingest => match config.ingest.format {
                PostsFormat::Xml => vec!["posts"],
                PostsFormat::Jsonl => vec!["raw_questions", "raw_answers"],
            },
            Stage::ScoreMetrics => {
                let mut roles = vec!["generations", "references"];
                let wanted = &config.metrics.metrics;
                if wanted.contains(&Metric::Bertscore) {
                    roles.push("embeddings");
                }
                if wanted.contains(&Metric::RegReward) {
                    roles.push("reg_rewards");
                }
                if wanted.contains(&Metric::ContrReward) {
                    roles.push("contr_rewards");
                }
                roles
            }
            Stage::Analyze => {
                let mut roles = vec!["metric_values"];
                if config.is_explicit("relevance") {
                    roles.push("relevance");
                }
                if config.analysis.reward_validation {
                    roles.extend(["answer_rewards", "regression_scores", "pairs"]);
                }
                roles
            }
            other => other.accepted_inputs().to_vec(),
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &["questions", "answers", "ingest_stats"],
            Stage::Preprocess => &["clean_questions", "clean_answers", "preprocess_stats"],
            Stage::ScoreRegression => &["regression_scores"],
            Stage::ScoreContrastive => &["pairs", "references"],
            Stage::Inject => &["synthetic_answers", "synthetic_scores", "synthetic_pairs"],
            Stage::ScoreMetrics => &["metric_values"],
            Stage::Analyze => &["report", "curves", "correlations"],
            Stage::Report => &["report_md"],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Config,
    MissingInput,
    InvalidData,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Config => 3,
            ErrorKind::MissingInput => 4,
            ErrorKind::InvalidData => 5,
            ErrorKind::Io => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineError {
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// `{"error": {"kind", "message", "exit_code"}}` as one line of JSON.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: ErrorKind,
            message: &'a str,
            exit_code: i32,
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Envelope {
            error: Body {
                kind: self.kind,
                message: &self.message,
                exit_code: self.exit_code(),
            },
        })
        .expect("error envelope serializes")
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for PipelineError {}

impl From<crate::Error> for PipelineError {
    fn from(e: crate::Error) -> Self {
        let kind = match &e {
            crate::Error::Io(_) => ErrorKind::Io,
            crate::Error::Pattern { .. } => ErrorKind::Config,
            _ => ErrorKind::InvalidData,
        };
        Self::new(kind, e.to_string())
    }
}

/// Runs one stage and returns the paths it wrote.
///
/// Inputs are checked up front; a failure at any point leaves no output
/// file behind (existing files at the output paths are left untouched).
pub fn run(stage: Stage, config: &RunConfig) -> Result<Vec<PathBuf>, PipelineError> {
    config.validate()?;
    let inputs = stage.inputs(config);
    let missing: Vec<String> = inputs
        .iter()
        .map(|role| (role, config.path(role)))
        .filter(|(_, p)| !p.is_file())
        .map(|(role, p)| format!("{role} ({})", p.display()))
        .collect();
    if !missing.is_empty() {
        return Err(PipelineError::new(
            ErrorKind::MissingInput,
            format!("missing input: {}", missing.join(", ")),
        ));
    }
    let input_paths: Vec<PathBuf> = inputs.iter().map(|r| config.path(r)).collect();
    for role in stage.outputs() {
        let out = config.path(role);
        if input_paths.contains(&out) {
            return Err(PipelineError::usage(format!(
                "output {role} would overwrite an input ({})",
                out.display()
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::config(format!("thread pool: {e}")))?;
    let outputs = pool.install(|| stages::run_stage(stage, config))?;
    let written = outputs.commit()?;
    for path in &written {
        log::info!("{stage}: wrote {}", path.display());
    }
    Ok(written)
}

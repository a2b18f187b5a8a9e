use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{run, LogLevel, PipelineError, RunConfig, Stage, ROLE_FILES};

#[derive(Debug, Parser)]
#[command(
    name = "cqa-eval",
    version,
    about = "Preference-data preparation and generation-quality evaluation for programming Q&A",
    after_help = "Environment: CQA_SEED and CQA_LOG override the configured seed and log level; flags override both."
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed recorded in every output and used for all sampling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: one per core). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, value_name = "LEVEL")]
    log_level: Option<LogLevel>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Input file, as PATH for the primary input or ROLE=PATH.
    #[arg(long = "input", value_name = "[ROLE=]PATH")]
    inputs: Vec<String>,
    /// Output directory as DIR, or one output file as ROLE=PATH.
    #[arg(long = "output", value_name = "DIR|ROLE=PATH")]
    outputs: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse Posts.xml (or question/answer JSONL), filter by tag and split
    /// by date. Reads: posts | raw_questions, raw_answers. Writes:
    /// questions.jsonl, answers.jsonl, ingest_stats.json.
    Ingest(Io),
    /// Keep API-usage questions without code, images or links and convert
    /// bodies to text. Reads: questions, answers. Writes:
    /// clean_questions.jsonl, clean_answers.jsonl, preprocess_stats.json.
    Preprocess(Io),
    /// Regression targets in [-1, 1] from votes. Reads: clean_answers.
    /// Writes: regression_scores.jsonl.
    ScoreRegression(Io),
    /// Log-scale contrast scores and preference pairs, plus one reference
    /// answer per question. Reads: clean_answers. Writes: pairs.jsonl,
    /// references.jsonl.
    ScoreContrastive(Io),
    /// Add generated answers to single-answer questions with sampled
    /// targets. Reads: clean_answers, synthetic_generations. Writes:
    /// synthetic_answers.jsonl, synthetic_scores.jsonl, synthetic_pairs.jsonl.
    Inject(Io),
    /// Score generations against references. Reads: generations,
    /// references [, embeddings, reg_rewards, contr_rewards]. Writes:
    /// metric_values.jsonl.
    ScoreMetrics(Io),
    /// Means with bootstrap intervals, metric@k curves, MRR@k, Spearman
    /// correlations and model comparisons. Reads: metric_values
    /// [, relevance, answer_rewards, regression_scores, pairs]. Writes:
    /// report.json, curves.csv, correlations.csv.
    Analyze(Io),
    /// Render report.json as Markdown. Reads: report. Writes: report.md.
    Report(Io),
}

impl Command {
    fn split(self) -> (Stage, Io) {
        match self {
            Command::Ingest(io) => (Stage::Ingest, io),
            Command::Preprocess(io) => (Stage::Preprocess, io),
            Command::ScoreRegression(io) => (Stage::ScoreRegression, io),
            Command::ScoreContrastive(io) => (Stage::ScoreContrastive, io),
            Command::Inject(io) => (Stage::Inject, io),
            Command::ScoreMetrics(io) => (Stage::ScoreMetrics, io),
            Command::Analyze(io) => (Stage::Analyze, io),
            Command::Report(io) => (Stage::Report, io),
        }
    }
}

/// Splits `ROLE=PATH`; a prefix that is not a known role is part of the path.
fn split_role(arg: &str) -> (Option<&str>, &Path) {
    if let Some((key, path)) = arg.split_once('=') {
        if ROLE_FILES.iter().any(|(r, _)| *r == key) {
            return (Some(key), Path::new(path));
        }
    }
    (None, Path::new(arg))
}

fn load_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| PipelineError::config(format!("config {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Ok(raw) = std::env::var("CQA_SEED") {
        config.seed = raw.trim().parse().map_err(|_| {
            PipelineError::config(format!("CQA_SEED must be an unsigned integer, got {raw:?}"))
        })?;
    }
    if let Ok(raw) = std::env::var("CQA_LOG") {
        config.log_level = Some(LogLevel::parse(&raw).ok_or_else(|| {
            PipelineError::config(format!(
                "CQA_LOG must be error|warn|info|debug, got {raw:?}"
            ))
        })?);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = Some(threads);
    }
    if let Some(level) = cli.log_level {
        config.log_level = Some(level);
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    let mut config = load_config(&cli)?;
    let level = config.log_level.unwrap_or(LogLevel::Warn);
    let _ = env_logger::Builder::new()
        .filter_level(level.filter())
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();

    let (stage, io) = cli.command.split();
    for arg in &io.inputs {
        let (key, path) = split_role(arg);
        config.set_input(stage, key, path)?;
    }
    for arg in &io.outputs {
        let (key, path) = split_role(arg);
        config.set_output(stage, key, path)?;
    }
    config.validate()?;
    run(stage, &config).map(|_| ())
}

/// Entry point of the `cqa-eval` binary; returns the process exit code.
///
/// Help and version requests print to stdout and return 0. Every failure
/// prints one line of JSON to stderr and returns the code of its
/// [`ErrorKind`](super::ErrorKind).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = PipelineError::usage(e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn role_prefix_only_for_known_roles() {
        assert_eq!(
            split_role("pairs=x.jsonl"),
            (Some("pairs"), Path::new("x.jsonl"))
        );
        assert_eq!(split_role("a=b/c.jsonl"), (None, Path::new("a=b/c.jsonl")));
        assert_eq!(split_role("plain.jsonl"), (None, Path::new("plain.jsonl")));
    }

    #[test]
    fn every_stage_has_a_subcommand() {
        let cmd = Cli::command();
        for stage in Stage::ALL {
            assert!(cmd.find_subcommand(stage.name()).is_some(), "{stage}");
        }
    }
}

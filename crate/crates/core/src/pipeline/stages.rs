use std::collections::{BTreeSet, HashMap};
use std::fs;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::ingest::{
    self, Answer, ParseDiagnostics, ParsedPosts, Question, Split, SplitConfig, WithSplit,
};
use crate::io::{self, Meta, OutputSet};
use crate::metrics::{
    self, EmbeddingRow, Generation, GenerationReward, Reference, ScoreInputs, ScoreOptions,
};
use crate::preprocess::{self, CleanAnswer, CleanQuestion};
use crate::scoring::{self, ContrastPair, RegressionScore, SyntheticConfig};

use super::{analyze, report, ErrorKind, PipelineError, PostsFormat, RunConfig, Stage};

type StageResult<T> = Result<T, PipelineError>;

/// Reads inputs, recording their digests in the run metadata.
struct Ctx<'a> {
    config: &'a RunConfig,
    meta: Meta,
}

impl<'a> Ctx<'a> {
    fn new(stage: Stage, config: &'a RunConfig) -> Self {
        Self {
            config,
            meta: Meta::new(stage.name(), config.seed),
        }
    }

    fn bytes_at(&mut self, role: &str, path: &std::path::Path) -> StageResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| {
            let kind = if e.kind() == std::io::ErrorKind::NotFound {
                ErrorKind::MissingInput
            } else {
                ErrorKind::Io
            };
            PipelineError::new(kind, format!("{role} ({}): {e}", path.display()))
        })?;
        self.meta
            .input_digests
            .insert(role.to_string(), io::sha256_hex(&bytes));
        Ok(bytes)
    }

    fn bytes(&mut self, role: &str) -> StageResult<Vec<u8>> {
        let path = self.config.path(role);
        self.bytes_at(role, &path)
    }

    fn jsonl<T: DeserializeOwned>(&mut self, role: &str) -> StageResult<Vec<T>> {
        let bytes = self.bytes(role)?;
        Ok(io::read_jsonl(&bytes[..], role)?)
    }

    fn jsonl_at<T: DeserializeOwned>(
        &mut self,
        role: &str,
        path: &std::path::Path,
    ) -> StageResult<Vec<T>> {
        let bytes = self.bytes_at(role, path)?;
        Ok(io::read_jsonl(&bytes[..], role)?)
    }

    fn optional_jsonl<T: DeserializeOwned>(&mut self, role: &str) -> StageResult<Option<Vec<T>>> {
        if self.config.path(role).is_file() || self.config.is_explicit(role) {
            self.jsonl(role).map(Some)
        } else {
            Ok(None)
        }
    }

    fn add_jsonl<T: Serialize>(
        &self,
        out: &mut OutputSet,
        role: &str,
        rows: &[T],
    ) -> StageResult<()> {
        out.add(
            self.config.path(role),
            io::jsonl_bytes(Some(&self.meta), rows)?,
        );
        Ok(())
    }

    fn add_json<T: Serialize>(&self, out: &mut OutputSet, role: &str, body: &T) -> StageResult<()> {
        out.add(self.config.path(role), io::json_bytes(&self.meta, body)?);
        Ok(())
    }

    fn add_csv<T: Serialize>(
        &self,
        out: &mut OutputSet,
        role: &str,
        rows: &[T],
    ) -> StageResult<()> {
        out.add(self.config.path(role), io::csv_bytes(&self.meta, rows)?);
        Ok(())
    }
}

fn invalid(message: impl Into<String>) -> PipelineError {
    PipelineError::new(ErrorKind::InvalidData, message)
}

pub(super) fn run_stage(stage: Stage, config: &RunConfig) -> StageResult<OutputSet> {
    let mut ctx = Ctx::new(stage, config);
    let mut out = OutputSet::new();
    match stage {
        Stage::Ingest => ingest_stage(&mut ctx, &mut out)?,
        Stage::Preprocess => preprocess_stage(&mut ctx, &mut out)?,
        Stage::ScoreRegression => regression_stage(&mut ctx, &mut out)?,
        Stage::ScoreContrastive => contrastive_stage(&mut ctx, &mut out)?,
        Stage::Inject => inject_stage(&mut ctx, &mut out)?,
        Stage::ScoreMetrics => metrics_stage(&mut ctx, &mut out)?,
        Stage::Analyze => analyze_stage(&mut ctx, &mut out)?,
        Stage::Report => report_stage(&mut ctx, &mut out)?,
    }
    Ok(out)
}

fn check_unique<I: IntoIterator<Item = u64>>(ids: I, what: &str) -> StageResult<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(invalid(format!("duplicate {what} id {id}")));
        }
    }
    Ok(())
}

fn ingest_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let parsed = match ctx.config.ingest.format {
        PostsFormat::Xml => {
            let bytes = ctx.bytes("posts")?;
            ingest::parse_posts(&bytes[..])?
        }
        PostsFormat::Jsonl => {
            let questions: Vec<Question> = ctx.jsonl("raw_questions")?;
            let mut answers: Vec<Answer> = ctx.jsonl("raw_answers")?;
            let answer_rows = answers.len();
            let orphan_answers = ingest::link_answers(&questions, &mut answers);
            ParsedPosts {
                diagnostics: ParseDiagnostics {
                    question_rows: questions.len(),
                    answer_rows,
                    other_rows: 0,
                    orphan_answers,
                },
                questions,
                answers,
            }
        }
    };
    check_unique(parsed.questions.iter().map(|q| q.id), "question")?;
    check_unique(parsed.answers.iter().map(|a| a.id), "answer")?;
    if let Some(q) = parsed.questions.iter().find(|q| q.id == 0) {
        return Err(invalid(format!(
            "question ids must be positive, got {}",
            q.id
        )));
    }

    let split_config = SplitConfig {
        cutoff: ctx.config.ingest.cutoff,
        tag_filter: ctx.config.ingest.tag.iter().cloned().collect(),
    };
    let ingested = ingest::prepare(parsed, &split_config);
    let splits: HashMap<u64, Split> = ingested
        .questions
        .iter()
        .map(|q| (q.record.id, q.split))
        .collect();
    let answers: Vec<WithSplit<Answer>> = ingested
        .answers
        .into_iter()
        .map(|a| WithSplit {
            split: splits[&a.question_id],
            record: a,
        })
        .collect();
    log::info!(
        "ingest: {} questions ({} train, {} validation), {} answers, {} orphans",
        ingested.questions.len(),
        ingested.stats.train_questions,
        ingested.stats.validation_questions,
        answers.len(),
        ingested.stats.orphan_answers
    );
    ctx.add_jsonl(out, "questions", &ingested.questions)?;
    ctx.add_jsonl(out, "answers", &answers)?;
    ctx.add_json(out, "ingest_stats", &ingested.stats)
}

fn load_rules(ctx: &mut Ctx<'_>) -> StageResult<preprocess::CompiledRules> {
    let category = ctx.config.preprocess.category.clone();
    let text = match ctx.config.preprocess.ruleset.clone() {
        Some(path) => {
            let bytes = ctx.bytes_at("ruleset", &path)?;
            String::from_utf8(bytes)
                .map_err(|_| PipelineError::config("ruleset file is not UTF-8"))?
        }
        None => preprocess::DEFAULT_RULES_JSON.to_string(),
    };
    let to_config = |e: crate::Error| PipelineError::config(e.to_string());
    let sets = preprocess::parse_rulesets(&text).map_err(to_config)?;
    preprocess::select(&sets, &category)
        .and_then(|r| r.compile())
        .map_err(to_config)
}

fn preprocess_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let questions: Vec<WithSplit<Question>> = ctx.jsonl("questions")?;
    let answers: Vec<WithSplit<Answer>> = ctx.jsonl("answers")?;
    let rules = load_rules(ctx)?;

    let splits: HashMap<u64, Split> = questions.iter().map(|q| (q.record.id, q.split)).collect();
    let questions: Vec<Question> = questions.into_iter().map(|q| q.record).collect();
    let answers: Vec<Answer> = answers.into_iter().map(|a| a.record).collect();
    let result = preprocess::run_preprocess(&questions, &answers, &rules);

    let clean_questions: Vec<WithSplit<CleanQuestion>> = result
        .questions
        .into_iter()
        .map(|q| WithSplit {
            split: splits[&q.id],
            record: q,
        })
        .collect();
    let clean_answers: Vec<WithSplit<CleanAnswer>> = result
        .answers
        .into_iter()
        .map(|a| WithSplit {
            split: splits[&a.question_id],
            record: a,
        })
        .collect();
    log::info!(
        "preprocess: kept {}/{} questions, {}/{} answers",
        result.stats.questions_kept,
        result.stats.questions_in,
        result.stats.answers_kept,
        result.stats.answers_in
    );
    ctx.add_jsonl(out, "clean_questions", &clean_questions)?;
    ctx.add_jsonl(out, "clean_answers", &clean_answers)?;
    ctx.add_json(out, "preprocess_stats", &result.stats)
}

/// Clean answers in the configured split, and all clean answers.
fn selected_answers(ctx: &mut Ctx<'_>) -> StageResult<(Vec<CleanAnswer>, Vec<CleanAnswer>)> {
    let rows: Vec<WithSplit<CleanAnswer>> = ctx.jsonl("clean_answers")?;
    check_unique(rows.iter().map(|a| a.record.id), "answer")?;
    let selection = ctx.config.scoring.split;
    let selected = rows
        .iter()
        .filter(|r| selection.accepts(r.split))
        .map(|r| r.record.clone())
        .collect();
    let all = rows.into_iter().map(|r| r.record).collect();
    Ok((selected, all))
}

fn regression_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let (selected, _) = selected_answers(ctx)?;
    if selected.is_empty() {
        return Err(invalid("no answers in the selected split"));
    }
    let grouped = scoring::group_votes(&selected);
    let raws = scoring::regression_raw(&grouped)?;
    let scores = scoring::regression_scale(&raws)?;
    let outliers = scores.iter().filter(|s| s.is_outlier).count();
    log::info!(
        "score-regression: {} answers, {outliers} outliers",
        scores.len()
    );
    ctx.add_jsonl(out, "regression_scores", &scores)
}

fn contrastive_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let (selected, everything) = selected_answers(ctx)?;
    let scored: Vec<_> = scoring::group_votes(&selected)
        .iter()
        .map(scoring::score_question)
        .collect();
    let pairs = scoring::build_pairs(&scored);

    let text: HashMap<u64, &str> = everything
        .iter()
        .map(|a| (a.id, a.body_text.as_str()))
        .collect();
    let references: Vec<Reference> = scoring::group_votes(&everything)
        .iter()
        .map(scoring::score_question)
        .filter_map(|q| {
            scoring::best_answer(&q).map(|best| Reference {
                question_id: q.question_id,
                answer_id: best.answer_id,
                text: text[&best.answer_id].to_string(),
            })
        })
        .collect();
    log::info!(
        "score-contrastive: {} pairs over {} questions, {} references",
        pairs.len(),
        scored.len(),
        references.len()
    );
    ctx.add_jsonl(out, "pairs", &pairs)?;
    ctx.add_jsonl(out, "references", &references)
}

fn inject_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let (selected, everything) = selected_answers(ctx)?;
    let generations: Vec<Generation> = ctx.jsonl("synthetic_generations")?;
    let targeted: BTreeSet<u64> = generations.iter().map(|g| g.question_id).collect();
    let questions: Vec<_> = scoring::group_votes(&selected)
        .iter()
        .filter(|q| targeted.contains(&q.question_id))
        .map(scoring::score_question)
        .collect();
    let params = ctx.config.synthetic;
    let first_id = match params.first_id {
        Some(id) => id,
        None => everything.iter().map(|a| a.id).max().unwrap_or(0) + 1,
    };
    let batch = scoring::inject_synthetic(
        &questions,
        &generations,
        &SyntheticConfig {
            seed: ctx.config.seed,
            mean: params.mean,
            stddev: params.stddev,
            first_id,
        },
    )?;
    log::info!("inject: {} synthetic answers", batch.answers.len());
    ctx.add_jsonl(out, "synthetic_answers", &batch.answers)?;
    ctx.add_jsonl(out, "synthetic_scores", &batch.scores)?;
    ctx.add_jsonl(out, "synthetic_pairs", &batch.pairs)
}

fn metrics_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let wanted = ctx.config.metrics.metrics.clone();
    let generations: Vec<Generation> = ctx.jsonl("generations")?;
    let references: Vec<Reference> = ctx.jsonl("references")?;
    let embeddings = if wanted.contains(&metrics::Metric::Bertscore) {
        let rows: Vec<EmbeddingRow> = ctx.jsonl("embeddings")?;
        Some(metrics::index_embeddings(&rows)?)
    } else {
        None
    };
    let reg: Option<Vec<GenerationReward>> = if wanted.contains(&metrics::Metric::RegReward) {
        Some(ctx.jsonl("reg_rewards")?)
    } else {
        None
    };
    let contr: Option<Vec<GenerationReward>> = if wanted.contains(&metrics::Metric::ContrReward) {
        Some(ctx.jsonl("contr_rewards")?)
    } else {
        None
    };
    let values = metrics::score_all(
        &ScoreInputs {
            generations: &generations,
            references: &references,
            embeddings: embeddings.as_ref(),
            reg_rewards: reg.as_deref(),
            contr_rewards: contr.as_deref(),
        },
        &ScoreOptions {
            metrics: wanted,
            bleu_max_n: ctx.config.metrics.bleu_max_n,
        },
    )?;
    log::info!(
        "score-metrics: {} values for {} generations",
        values.len(),
        generations.len()
    );
    ctx.add_jsonl(out, "metric_values", &values)
}

fn analyze_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let params = ctx.config.analysis.clone();
    let mut models = Vec::with_capacity(1 + params.compare.len());
    models.push(analyze::ModelInput {
        label: params.label.clone(),
        values: ctx.jsonl("metric_values")?,
        relevance: ctx.optional_jsonl("relevance")?,
    });
    for c in &params.compare {
        let values = {
            let role = format!("metric_values:{}", c.label);
            require_file(&role, &c.metric_values)?;
            ctx.jsonl_at(&role, &c.metric_values)?
        };
        let relevance = match &c.relevance {
            Some(path) => {
                let role = format!("relevance:{}", c.label);
                require_file(&role, path)?;
                Some(ctx.jsonl_at(&role, path)?)
            }
            None => None,
        };
        models.push(analyze::ModelInput {
            label: c.label.clone(),
            values,
            relevance,
        });
    }
    let rewards = if params.reward_validation {
        let rewards: Vec<scoring::validation::AnswerReward> = ctx.jsonl("answer_rewards")?;
        let scores: Vec<RegressionScore> = ctx.jsonl("regression_scores")?;
        let pairs: Vec<ContrastPair> = ctx.jsonl("pairs")?;
        Some(scoring::validation::validate_rewards(
            &rewards, &scores, &pairs,
        )?)
    } else {
        None
    };

    let result = analyze::analyze(&models, &params, ctx.config.seed, rewards)?;
    ctx.add_json(out, "report", &result.report)?;
    ctx.add_csv(out, "curves", &result.curves)?;
    ctx.add_csv(out, "correlations", &result.correlations)
}

fn require_file(role: &str, path: &std::path::Path) -> StageResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::new(
            ErrorKind::MissingInput,
            format!("missing input: {role} ({})", path.display()),
        ))
    }
}

fn report_stage(ctx: &mut Ctx<'_>, out: &mut OutputSet) -> StageResult<()> {
    let bytes = ctx.bytes("report")?;
    let document: analyze::AnalysisReport =
        serde_json::from_slice(&bytes).map_err(|e| invalid(format!("report: {e}")))?;
    let text = report::render_markdown(&document, &ctx.meta);
    out.add(ctx.config.path("report_md"), text.into_bytes());
    Ok(())
}

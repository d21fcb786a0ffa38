//! Cross-validated evaluation runs and their output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::episode::{run_episode, submission_round, Grader, Tutor};
use super::judge::{judge_materials, JUDGE_ROLE};
use super::metrics::{pass_at_k, recall_at_k, tir, OutcomeMatrix};
use super::student::{build_student, Exchange, TestPhase, STUDENT_ROLE};
use super::{assign_folds, EvalConfig, EvalError, TutorKind};
use crate::dataset::Problem;
use crate::llm::Gateway;
use crate::profile::Level;
use crate::prompts::PromptSet;
use crate::session::{Engine, EngineConfig};
use crate::tools::{CodeExecutor, Crawler, SandboxPolicy};

/// Everything an evaluation run needs besides the dataset and config.
pub struct EvalContext {
    pub gateway: Arc<Gateway>,
    pub executor: Arc<dyn CodeExecutor>,
    pub crawler: Crawler,
    pub policy: SandboxPolicy,
    pub prompts: PromptSet,
    /// Scratch space for tutoring sessions.
    pub workspace: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub phase: TestPhase,
    pub pass_at_k: f64,
    pub recall_at_k: f64,
}

impl MetricReport {
    fn of(phase: TestPhase, matrix: &OutcomeMatrix) -> Self {
        Self {
            phase,
            pass_at_k: pass_at_k(matrix),
            recall_at_k: recall_at_k(matrix),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub tutor: TutorKind,
    pub level: Level,
    pub fold: usize,
    pub problems: Vec<String>,
    pub pre: MetricReport,
    pub post: MetricReport,
    pub turns: usize,
    pub early_stops: usize,
}

/// Improvement rate in percent, or a marker for a zero pre-test score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TirValue {
    pub percent: Option<f64>,
    pub undefined_baseline: bool,
}

impl TirValue {
    fn of(pre: f64, post: f64) -> Self {
        match tir(pre, post) {
            Ok(p) => Self { percent: Some(p), undefined_baseline: false },
            Err(_) => Self { percent: None, undefined_baseline: true },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub tutor: TutorKind,
    /// A level name, or `all` for the mean over every level.
    pub level: String,
    pub folds: usize,
    pub pre: MetricReport,
    pub post: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TirResult {
    pub tutor: TutorKind,
    pub level: String,
    pub pass: TirValue,
    pub recall: TirValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResults {
    pub config: EvalConfig,
    /// Problem ids per fold.
    pub folds: Vec<Vec<String>>,
    pub per_fold: Vec<FoldResult>,
    pub aggregate: Vec<AggregateResult>,
    pub tir: Vec<TirResult>,
}

/// Per-episode detail, written next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub tutor: TutorKind,
    pub level: Level,
    pub fold: usize,
    pub problem_id: String,
    pub dialogue: Vec<Exchange>,
    pub stopped_early: bool,
    pub pre_sources: Vec<Option<String>>,
    pub pre_row: Vec<Vec<bool>>,
    pub post_sources: Vec<Option<String>>,
    pub post_row: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityRecord {
    pub level: Level,
    pub fold: usize,
    pub problem_id: String,
    pub topic: String,
    pub ia: u8,
    pub cc: u8,
    pub int: u8,
    pub per: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMean {
    pub level: String,
    pub ia: f64,
    pub cc: f64,
    pub int: f64,
    pub per: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub rubric_version: String,
    pub records: Vec<QualityRecord>,
    pub means: Vec<QualityMean>,
}

/// Output of [`cross_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub results: EvalResults,
    pub quality: QualityReport,
    pub episodes: Vec<EpisodeSummary>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values.into_iter().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn aggregate_over(tutor: TutorKind, level: String, entries: &[&FoldResult]) -> AggregateResult {
    let report = |phase: TestPhase, pick: fn(&FoldResult) -> &MetricReport| MetricReport {
        phase,
        pass_at_k: mean(entries.iter().map(|f| pick(f).pass_at_k)),
        recall_at_k: mean(entries.iter().map(|f| pick(f).recall_at_k)),
    };
    AggregateResult {
        tutor,
        level,
        folds: entries.len(),
        pre: report(TestPhase::Pre, |f| &f.pre),
        post: report(TestPhase::Post, |f| &f.post),
    }
}

/// Means of the per-fold metrics, per tutor and level and per tutor over
/// all levels.
pub fn aggregate(per_fold: &[FoldResult], config: &EvalConfig) -> (Vec<AggregateResult>, Vec<TirResult>) {
    let mut aggregates = Vec::new();
    for &tutor in &config.tutors {
        for &level in &config.levels {
            let entries: Vec<&FoldResult> = per_fold
                .iter()
                .filter(|f| f.tutor == tutor && f.level == level)
                .collect();
            aggregates.push(aggregate_over(tutor, level.as_str().into(), &entries));
        }
        let all: Vec<&FoldResult> = per_fold.iter().filter(|f| f.tutor == tutor).collect();
        aggregates.push(aggregate_over(tutor, "all".into(), &all));
    }
    let tirs = aggregates
        .iter()
        .map(|a| TirResult {
            tutor: a.tutor,
            level: a.level.clone(),
            pass: TirValue::of(a.pre.pass_at_k, a.post.pass_at_k),
            recall: TirValue::of(a.pre.recall_at_k, a.post.recall_at_k),
        })
        .collect();
    (aggregates, tirs)
}

fn quality_means(records: &[QualityRecord], levels: &[Level]) -> Vec<QualityMean> {
    let mean_of = |label: String, rs: Vec<&QualityRecord>| QualityMean {
        level: label,
        ia: mean(rs.iter().map(|r| f64::from(r.ia))),
        cc: mean(rs.iter().map(|r| f64::from(r.cc))),
        int: mean(rs.iter().map(|r| f64::from(r.int))),
        per: mean(rs.iter().map(|r| f64::from(r.per))),
    };
    let mut out: Vec<QualityMean> = levels
        .iter()
        .map(|l| mean_of(l.as_str().into(), records.iter().filter(|r| r.level == *l).collect()))
        .filter(|_| !records.is_empty())
        .collect();
    if !records.is_empty() {
        out.push(mean_of("all".into(), records.iter().collect()));
    }
    out
}

/// Seeded k-fold evaluation. Each fold's problems serve as both pre-test
/// and post-test items: every student first submits K solutions unaided,
/// then is tutored for up to T turns and submits K more.
pub fn cross_validate(problems: &[Problem], config: &EvalConfig, ctx: &EvalContext) -> Result<EvalRun, EvalError> {
    let n = config.validate(problems.len())?;
    let problems = &problems[..n];
    if let Some(p) = problems.iter().find(|p| p.test_cases.len() != config.m) {
        return Err(EvalError::Config(format!(
            "problem {} has {} cases, expected m = {}",
            p.problem_id,
            p.test_cases.len(),
            config.m
        )));
    }
    let folds = assign_folds(n, config.folds, config.seed)?;
    let grader = Grader::new(ctx.executor.clone(), ctx.policy.clone());
    let student_binding = ctx.gateway.binding(STUDENT_ROLE)?;
    let judge_binding = if config.judge && config.tutors.contains(&TutorKind::Codeedu) {
        Some(ctx.gateway.binding_or(JUDGE_ROLE, crate::agents::TUTOR)?)
    } else {
        None
    };
    let engine = if config.tutors.contains(&TutorKind::Codeedu) {
        let mut ec = EngineConfig::new(ctx.workspace.join("codeedu"));
        ec.max_turns = config.turns;
        ec.sequential_ids = true;
        Some(Engine::new(
            ec,
            ctx.gateway.clone(),
            ctx.executor.clone(),
            ctx.crawler.clone(),
            ctx.policy.clone(),
            problems.to_vec(),
            &ctx.prompts,
        )?)
    } else {
        None
    };

    let mut per_fold = Vec::new();
    let mut episodes = Vec::new();
    let mut quality = Vec::new();
    for (fold, members) in folds.iter().enumerate() {
        let fold_problems: Vec<&Problem> = members.iter().map(|i| &problems[*i]).collect();
        let ids: Vec<String> = fold_problems.iter().map(|p| p.problem_id.clone()).collect();
        for &level in &config.levels {
            let mut pre_rows = Vec::new();
            let mut post_rows: BTreeMap<TutorKind, Vec<Vec<Vec<bool>>>> = BTreeMap::new();
            let mut turns: BTreeMap<TutorKind, (usize, usize)> = BTreeMap::new();
            for problem in &fold_problems {
                tracing::info!(fold, %level, problem = %problem.problem_id, "evaluating");
                let student = build_student(level, problem, student_binding.clone());
                let pre = submission_round(&student, &ctx.gateway, &grader, problem, &[], TestPhase::Pre, config)?;
                pre_rows.push(pre.row.clone());
                for &kind in &config.tutors {
                    let tutor = match kind {
                        TutorKind::Codeedu => Tutor::Codeedu(engine.as_ref().expect("engine built for codeedu")),
                        TutorKind::Baseline => Tutor::Baseline,
                    };
                    let ep = run_episode(&student, &tutor, &ctx.gateway, &grader, problem, config)?;
                    if let (Some(binding), Some(material), Some(profile)) = (&judge_binding, &ep.material, &ep.profile) {
                        let s = judge_materials(&ctx.gateway, binding, material, profile)?;
                        quality.push(QualityRecord {
                            level,
                            fold,
                            problem_id: problem.problem_id.clone(),
                            topic: material.topic.clone(),
                            ia: s.ia,
                            cc: s.cc,
                            int: s.int,
                            per: s.per,
                        });
                    }
                    let t = turns.entry(kind).or_default();
                    t.0 += ep.turns();
                    t.1 += usize::from(ep.stopped_early);
                    post_rows.entry(kind).or_default().push(ep.post.row.clone());
                    episodes.push(EpisodeSummary {
                        tutor: kind,
                        level,
                        fold,
                        problem_id: problem.problem_id.clone(),
                        dialogue: ep.dialogue,
                        stopped_early: ep.stopped_early,
                        pre_sources: pre.sources.clone(),
                        pre_row: pre.row.clone(),
                        post_sources: ep.post.sources,
                        post_row: ep.post.row,
                    });
                }
            }
            let pre_matrix = OutcomeMatrix::from_rows(&pre_rows)?;
            for &kind in &config.tutors {
                let post_matrix = OutcomeMatrix::from_rows(&post_rows[&kind])?;
                let (t, early) = turns[&kind];
                per_fold.push(FoldResult {
                    tutor: kind,
                    level,
                    fold,
                    problems: ids.clone(),
                    pre: MetricReport::of(TestPhase::Pre, &pre_matrix),
                    post: MetricReport::of(TestPhase::Post, &post_matrix),
                    turns: t,
                    early_stops: early,
                });
            }
        }
    }
    tracing::info!(graded_sources = grader.cached(), "evaluation finished");

    let (aggregate, tir) = aggregate(&per_fold, config);
    let fold_ids = folds
        .iter()
        .map(|f| f.iter().map(|i| problems[*i].problem_id.clone()).collect())
        .collect();
    let means = quality_means(&quality, &config.levels);
    Ok(EvalRun {
        results: EvalResults {
            config: config.clone(),
            folds: fold_ids,
            per_fold,
            aggregate,
            tir,
        },
        quality: QualityReport {
            rubric_version: super::judge::rubric_version(),
            records: quality,
            means,
        },
        episodes,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), EvalError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| EvalError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn fmt_tir(v: &TirValue) -> String {
    v.percent.map_or_else(|| "undefined".to_string(), |p| p.to_string())
}

/// Writes `results.json`, `results.csv`, `quality.json` and `episodes.json`
/// into `out_dir`.
pub fn write_outputs(run: &EvalRun, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(out_dir)?;
    let results = out_dir.join("results.json");
    write_json(&results, &run.results)?;
    let quality = out_dir.join("quality.json");
    write_json(&quality, &run.quality)?;
    let episodes = out_dir.join("episodes.json");
    write_json(&episodes, &run.episodes)?;

    let csv_path = out_dir.join("results.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| EvalError::Io(e.to_string()))?;
    let io = |e: csv::Error| EvalError::Io(e.to_string());
    w.write_record([
        "tutor", "level", "fold", "pre_pass_at_k", "pre_recall_at_k", "post_pass_at_k", "post_recall_at_k",
        "tir_pass", "tir_recall",
    ])
    .map_err(io)?;
    for f in &run.results.per_fold {
        w.write_record([
            f.tutor.as_str().to_string(),
            f.level.as_str().to_string(),
            f.fold.to_string(),
            f.pre.pass_at_k.to_string(),
            f.pre.recall_at_k.to_string(),
            f.post.pass_at_k.to_string(),
            f.post.recall_at_k.to_string(),
            fmt_tir(&TirValue::of(f.pre.pass_at_k, f.post.pass_at_k)),
            fmt_tir(&TirValue::of(f.pre.recall_at_k, f.post.recall_at_k)),
        ])
        .map_err(io)?;
    }
    for (a, t) in run.results.aggregate.iter().zip(&run.results.tir) {
        w.write_record([
            a.tutor.as_str().to_string(),
            a.level.clone(),
            "mean".to_string(),
            a.pre.pass_at_k.to_string(),
            a.pre.recall_at_k.to_string(),
            a.post.pass_at_k.to_string(),
            a.post.recall_at_k.to_string(),
            fmt_tir(&t.pass),
            fmt_tir(&t.recall),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(vec![results, csv_path, quality, episodes])
}

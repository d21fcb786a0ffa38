//! Evaluation with simulated students: pre/post tests around tutoring
//! episodes, pass and recall over an outcome matrix, improvement rates, and
//! rubric scores for generated material, under seeded k-fold splits.

mod episode;
mod folds;
mod judge;
mod metrics;
mod run;
mod student;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use episode::{run_episode, submission_round, EpisodeResult, Grader, SubmissionRound, Tutor, BASELINE_ROLE};
pub use folds::assign_folds;
pub use judge::{judge_materials, parse_rating, rubric_prompt, rubric_version, QualityScores, JUDGE_ROLE};
pub use metrics::{pass_at_k, recall_at_k, tir, OutcomeMatrix};
pub use run::{
    aggregate, cross_validate, write_outputs, AggregateResult, EpisodeSummary, EvalContext,
    EvalResults, EvalRun, FoldResult, MetricReport, QualityMean, QualityRecord, QualityReport,
    TirResult, TirValue,
};
pub use student::{build_student, exposure, extract_code, Exchange, SimulatedStudent, TestPhase, STUDENT_ROLE};

use crate::dataset::DatasetError;
use crate::llm::LlmError;
use crate::profile::Level;
use crate::session::SessionError;
use crate::tools::{SandboxError, SandboxPolicy};

/// Per-case wall-clock limit used when grading submissions.
pub const CASE_TIME_LIMIT: Duration = Duration::from_secs(2);

/// Sandbox policy for grading: the default limits with [`CASE_TIME_LIMIT`].
pub fn grading_policy() -> SandboxPolicy {
    SandboxPolicy::default().with_wall_clock(CASE_TIME_LIMIT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TutorKind {
    Codeedu,
    Baseline,
}

impl TutorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TutorKind::Codeedu => "codeedu",
            TutorKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for TutorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TutorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "codeedu" => Ok(TutorKind::Codeedu),
            "baseline" => Ok(TutorKind::Baseline),
            other => Err(format!("unknown tutor `{other}` (expected codeedu or baseline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Number of problems taken from the front of the dataset; all when unset.
    pub n: Option<usize>,
    /// Submissions per problem.
    pub k: usize,
    /// Test cases per problem.
    pub m: usize,
    /// Maximum dialogue turns per episode.
    pub turns: usize,
    pub folds: usize,
    pub seed: u64,
    pub levels: Vec<Level>,
    pub tutors: Vec<TutorKind>,
    /// Rate CodeEdu material with the rubric judge.
    pub judge: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n: None,
            k: 3,
            m: crate::dataset::DEFAULT_CASES_PER_PROBLEM,
            turns: crate::session::DEFAULT_MAX_TURNS,
            folds: 5,
            seed: 0,
            levels: Level::ALL.to_vec(),
            tutors: vec![TutorKind::Codeedu, TutorKind::Baseline],
            judge: true,
        }
    }
}

impl EvalConfig {
    /// Checks the parameters against a dataset of `available` problems and
    /// returns the problem count to use.
    pub fn validate(&self, available: usize) -> Result<usize, EvalError> {
        let n = self.n.unwrap_or(available);
        for (name, v) in [("n", n), ("k", self.k), ("m", self.m), ("turns", self.turns), ("folds", self.folds)] {
            if v == 0 {
                return Err(EvalError::Config(format!("{name} must be positive")));
            }
        }
        if n > available {
            return Err(EvalError::Config(format!("n = {n} but the dataset has {available} problems")));
        }
        if self.folds > n {
            return Err(EvalError::Config(format!("folds = {} exceeds n = {n}", self.folds)));
        }
        if self.levels.is_empty() || self.tutors.is_empty() {
            return Err(EvalError::Config("at least one level and one tutor are required".into()));
        }
        Ok(n)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid evaluation config: {0}")]
    Config(String),
    #[error("improvement rate is undefined for a zero pre-test score")]
    UndefinedBaseline,
    #[error("rating reply could not be parsed: {0}")]
    UnparseableRating(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error("writing results: {0}")]
    Io(String),
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Io(e.to_string())
    }
}

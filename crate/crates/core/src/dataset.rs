//! Problem dataset: JSON lines, one problem per line, test cases inline.
//!
//! ```text
//! {"problem_id": "p01", "title": "...", "statement": "...", "concepts": "...",
//!  "sample_code": "...", "reference_solution": "...", "difficulty": "easy",
//!  "tags": ["loops"], "test_cases": [{"input": "3\n", "expected_output": "6\n"}]}
//! ```
//!
//! `steps` is optional; each step lists the indices of the cases it checks.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tools::{run_unit_tests, CodeExecutor, SandboxError, SandboxPolicy, TestCase, TestReport};

pub const DEFAULT_CASES_PER_PROBLEM: usize = 10;

/// The ten-problem toy set shipped with the crate.
pub const TOY_PROBLEMS: &str = include_str!("../assets/problems/toy.jsonl");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub prompt: String,
    #[serde(default)]
    pub hint: String,
    /// Indices into the problem's test cases.
    pub cases: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub problem_id: String,
    pub title: String,
    pub statement: String,
    #[serde(default)]
    pub concepts: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_solution: Option<String>,
    pub test_cases: Vec<TestCase>,
    #[serde(default)]
    pub difficulty: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepSpec>>,
}

impl Problem {
    /// True if `topic` names one of the tags or appears in the title.
    pub fn matches_topic(&self, topic: &str) -> bool {
        let topic = topic.trim().to_lowercase();
        !topic.is_empty()
            && (self.tags.iter().any(|t| t.to_lowercase() == topic)
                || self.title.to_lowercase().contains(&topic))
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("problem {problem_id}: {message}")]
    Invalid { problem_id: String, message: String },
}

fn invalid(p: &Problem, message: impl Into<String>) -> DatasetError {
    DatasetError::Invalid {
        problem_id: p.problem_id.clone(),
        message: message.into(),
    }
}

/// Parses JSON lines; blank lines are skipped. When `cases_per_problem` is
/// set, every problem must have exactly that many cases.
pub fn parse_problems(text: &str, cases_per_problem: Option<usize>) -> Result<Vec<Problem>, DatasetError> {
    let mut problems = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Problem = serde_json::from_str(line).map_err(|e| DatasetError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !ids.insert(p.problem_id.clone()) {
            return Err(invalid(&p, "duplicate problem id"));
        }
        if p.statement.trim().is_empty() {
            return Err(invalid(&p, "statement is empty"));
        }
        if p.test_cases.is_empty() {
            return Err(invalid(&p, "no test cases"));
        }
        if let Some(m) = cases_per_problem {
            if p.test_cases.len() != m {
                return Err(invalid(
                    &p,
                    format!("has {} test cases, expected {m}", p.test_cases.len()),
                ));
            }
        }
        if let Some(steps) = &p.steps {
            if steps.is_empty() {
                return Err(invalid(&p, "steps list is empty"));
            }
            for s in steps {
                if s.cases.is_empty() || s.cases.iter().any(|c| *c >= p.test_cases.len()) {
                    return Err(invalid(&p, "step references no or out-of-range cases"));
                }
            }
        }
        problems.push(p);
    }
    Ok(problems)
}

pub fn load_problems(path: &Path, cases_per_problem: Option<usize>) -> Result<Vec<Problem>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_problems(&text, cases_per_problem)
}

pub fn toy_problems() -> Vec<Problem> {
    parse_problems(TOY_PROBLEMS, Some(DEFAULT_CASES_PER_PROBLEM)).expect("bundled toy set is valid")
}

/// Grades every reference solution; returns the ids of problems whose
/// reference solution does not pass all of its cases.
pub fn check_reference_solutions(
    problems: &[Problem],
    executor: &dyn CodeExecutor,
    policy: &SandboxPolicy,
) -> Result<Vec<(String, TestReport)>, SandboxError> {
    let mut failing = Vec::new();
    for p in problems {
        if let Some(src) = &p.reference_solution {
            let report = run_unit_tests(executor, src, &p.test_cases, policy)?;
            if !report.all_passed {
                failing.push((p.problem_id.clone(), report));
            }
        }
    }
    Ok(failing)
}

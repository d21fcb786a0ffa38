//! Unit-test harness: one fresh sandboxed run per test case.

use serde::{Deserialize, Serialize};

use super::sandbox::{CodeExecutor, ExecVerdict, ExecutionResult, SandboxError, SandboxPolicy};

/// How actual output is compared with the expected output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Comparison {
    Exact,
    /// Trailing whitespace on each line and trailing blank lines are ignored.
    #[default]
    WhitespaceNormalized,
    /// Whitespace-separated tokens; numbers match when
    /// `|actual - expected| <= tolerance * max(1, |expected|)`, other tokens
    /// must be identical.
    Numeric { tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
    #[serde(default)]
    pub comparison: Comparison,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        Self {
            input: input.into(),
            expected_output: expected_output.into(),
            comparison: Comparison::default(),
        }
    }

    pub fn with_comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    pub fn matches(&self, actual: &str) -> bool {
        outputs_match(self.comparison, actual, &self.expected_output)
    }
}

fn normalize_whitespace(s: &str) -> String {
    let mut lines: Vec<&str> = s.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

pub fn outputs_match(comparison: Comparison, actual: &str, expected: &str) -> bool {
    match comparison {
        Comparison::Exact => actual == expected,
        Comparison::WhitespaceNormalized => normalize_whitespace(actual) == normalize_whitespace(expected),
        Comparison::Numeric { tolerance } => {
            let a: Vec<&str> = actual.split_whitespace().collect();
            let e: Vec<&str> = expected.split_whitespace().collect();
            a.len() == e.len()
                && a.iter().zip(&e).all(|(a, e)| {
                    match (a.parse::<f64>(), e.parse::<f64>()) {
                        (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
                            (x - y).abs() <= tolerance * y.abs().max(1.0)
                        }
                        _ => a == e,
                    }
                })
        }
    }
}

/// Captured run of one test case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRun {
    pub passed: bool,
    pub stdout: String,
    pub stderr: String,
    pub verdict: ExecVerdict,
    pub exit_code: Option<i32>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    /// One entry per supplied case, in order.
    pub case_results: Vec<bool>,
    /// True iff every entry of `case_results` is true.
    pub all_passed: bool,
    pub runs: Vec<CaseRun>,
}

impl TestReport {
    pub fn from_runs(runs: Vec<CaseRun>) -> Self {
        let case_results: Vec<bool> = runs.iter().map(|r| r.passed).collect();
        let all_passed = case_results.iter().all(|p| *p);
        Self {
            case_results,
            all_passed,
            runs,
        }
    }

    /// A report where no case passed, as for a submission with no code.
    pub fn all_failed(cases: usize, reason: &str) -> Self {
        Self::from_runs(
            (0..cases)
                .map(|_| CaseRun {
                    passed: false,
                    stdout: String::new(),
                    stderr: reason.to_string(),
                    verdict: ExecVerdict::Completed,
                    exit_code: None,
                    elapsed_ms: 0,
                })
                .collect(),
        )
    }

    pub fn passed_count(&self) -> usize {
        self.case_results.iter().filter(|p| **p).count()
    }

    /// Equal verdicts and captures, ignoring timings.
    pub fn same_outcome(&self, other: &TestReport) -> bool {
        self.case_results == other.case_results
            && self.runs.len() == other.runs.len()
            && self.runs.iter().zip(&other.runs).all(|(a, b)| {
                a.stdout == b.stdout
                    && a.stderr == b.stderr
                    && a.verdict == b.verdict
                    && a.exit_code == b.exit_code
            })
    }
}

fn case_passed(case: &TestCase, result: &ExecutionResult) -> bool {
    result.succeeded() && case.matches(&result.stdout)
}

/// Runs `source` once per case in a fresh sandbox process.
pub fn run_unit_tests(
    executor: &dyn CodeExecutor,
    source: &str,
    cases: &[TestCase],
    policy: &SandboxPolicy,
) -> Result<TestReport, SandboxError> {
    if cases.is_empty() {
        return Err(SandboxError::NoTestCases);
    }
    if source.trim().is_empty() {
        return Ok(TestReport::all_failed(cases.len(), "empty submission"));
    }
    let mut runs = Vec::with_capacity(cases.len());
    for case in cases {
        let result = executor.execute(source, &case.input, policy)?;
        runs.push(CaseRun {
            passed: case_passed(case, &result),
            stdout: result.stdout,
            stderr: result.stderr,
            verdict: result.verdict,
            exit_code: result.exit_code,
            elapsed_ms: result.elapsed_ms,
        });
    }
    Ok(TestReport::from_runs(runs))
}

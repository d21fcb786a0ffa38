//! Step-by-step exercises built from dataset problems.

use serde::{Deserialize, Serialize};

use crate::dataset::Problem;
use crate::tools::{TestCase, TestReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseStep {
    pub prompt: String,
    pub hint: String,
    pub cases: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exercise {
    pub exercise_id: String,
    pub title: String,
    pub statement: String,
    pub steps: Vec<ExerciseStep>,
    pub test_cases: Vec<TestCase>,
}

fn first_sentence(text: &str) -> String {
    match text.find(". ") {
        Some(i) => text[..=i].to_string(),
        None => text.trim().to_string(),
    }
}

impl Exercise {
    /// Uses the problem's own steps when given. Otherwise a problem with M
    /// cases becomes two steps, the first checking the first M/2 cases and
    /// the second all of them; a single-case problem is a single step.
    pub fn from_problem(problem: &Problem) -> Self {
        let cases = &problem.test_cases;
        let steps = match &problem.steps {
            Some(steps) => steps
                .iter()
                .map(|s| ExerciseStep {
                    prompt: s.prompt.clone(),
                    hint: s.hint.clone(),
                    cases: s.cases.iter().map(|i| cases[*i].clone()).collect(),
                })
                .collect(),
            None if cases.len() <= 1 => vec![ExerciseStep {
                prompt: "Write a complete solution.".into(),
                hint: first_sentence(&problem.concepts),
                cases: cases.clone(),
            }],
            None => {
                let half = cases.len() / 2;
                vec![
                    ExerciseStep {
                        prompt: format!("Get the first {half} example cases passing."),
                        hint: first_sentence(&problem.concepts),
                        cases: cases[..half].to_vec(),
                    },
                    ExerciseStep {
                        prompt: "Extend the solution so that every case passes, including edge cases.".into(),
                        hint: "Check the smallest and largest inputs the statement allows.".into(),
                        cases: cases.clone(),
                    },
                ]
            }
        };
        Self {
            exercise_id: problem.problem_id.clone(),
            title: problem.title.clone(),
            statement: problem.statement.clone(),
            steps,
            test_cases: cases.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextAction {
    RetryStep,
    AdvanceStep,
    ExerciseComplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub exercise_id: String,
    pub step_index: usize,
    pub verdict: TestReport,
    pub suggestions: String,
    pub next_action: NextAction,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExerciseProgress {
    pub current_step: usize,
    pub attempts: usize,
    pub completed: bool,
}

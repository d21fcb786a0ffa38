//! Pre-tests and tutoring episodes for one simulated student.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::student::{extract_code, Exchange, SimulatedStudent, TestPhase};
use super::{EvalConfig, EvalError, TutorKind};
use crate::dataset::Problem;
use crate::llm::{ChatMessage, Gateway};
use crate::session::{check_stop, Engine, LearningMaterial};
use crate::tools::{run_unit_tests, CodeExecutor, SandboxPolicy};

/// Role name used for the single-agent baseline tutor.
pub const BASELINE_ROLE: &str = "baseline_tutor";

/// Grades submissions, remembering verdicts by problem and source digest so
/// identical submissions run once per evaluation.
pub struct Grader {
    executor: Arc<dyn CodeExecutor>,
    policy: SandboxPolicy,
    cache: Mutex<HashMap<(String, String), Vec<bool>>>,
}

impl Grader {
    pub fn new(executor: Arc<dyn CodeExecutor>, policy: SandboxPolicy) -> Self {
        Self {
            executor,
            policy,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Per-case verdicts over all of the problem's cases. A missing source
    /// (the student did not produce code) fails every case.
    pub fn grade(&self, problem: &Problem, source: Option<&str>) -> Result<Vec<bool>, EvalError> {
        let Some(source) = source else {
            return Ok(vec![false; problem.test_cases.len()]);
        };
        let key = (problem.problem_id.clone(), hex::encode(Sha256::digest(source.as_bytes())));
        if let Some(hit) = self.cache.lock().expect("grade cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let report = run_unit_tests(self.executor.as_ref(), source, &problem.test_cases, &self.policy)?;
        self.cache
            .lock()
            .expect("grade cache poisoned")
            .insert(key, report.case_results.clone());
        Ok(report.case_results)
    }

    /// Distinct (problem, source) pairs graded so far.
    pub fn cached(&self) -> usize {
        self.cache.lock().expect("grade cache poisoned").len()
    }
}

/// K submissions and their verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRound {
    pub phase: TestPhase,
    /// Extracted source per attempt; `None` when the reply held no code.
    pub sources: Vec<Option<String>>,
    /// `row[k][m]`.
    pub row: Vec<Vec<bool>>,
}

/// Asks for K submissions after `dialogue` and grades each against all M cases.
pub fn submission_round(
    student: &SimulatedStudent,
    gateway: &Gateway,
    grader: &Grader,
    problem: &Problem,
    dialogue: &[Exchange],
    phase: TestPhase,
    config: &EvalConfig,
) -> Result<SubmissionRound, EvalError> {
    if problem.test_cases.len() != config.m {
        return Err(EvalError::Config(format!(
            "problem {} has {} cases, expected {}",
            problem.problem_id,
            problem.test_cases.len(),
            config.m
        )));
    }
    let mut sources = Vec::with_capacity(config.k);
    let mut row = Vec::with_capacity(config.k);
    for attempt in 1..=config.k {
        let reply = student.submit(gateway, dialogue, phase, attempt, config.k)?;
        let source = extract_code(&reply);
        row.push(grader.grade(problem, source.as_deref())?);
        sources.push(source);
    }
    Ok(SubmissionRound { phase, sources, row })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub tutor: TutorKind,
    pub problem_id: String,
    pub dialogue: Vec<Exchange>,
    pub stopped_early: bool,
    pub post: SubmissionRound,
    /// Material generated for the student (CodeEdu only).
    #[serde(skip)]
    pub material: Option<LearningMaterial>,
    #[serde(skip)]
    pub profile: Option<crate::profile::StudentProfile>,
}

impl EpisodeResult {
    pub fn turns(&self) -> usize {
        self.dialogue.len()
    }
}

/// Who tutors the student in an episode.
pub enum Tutor<'a> {
    /// The full multi-agent workflow.
    Codeedu(&'a Engine),
    /// A single statically prompted agent.
    Baseline,
}

impl Tutor<'_> {
    pub fn kind(&self) -> TutorKind {
        match self {
            Tutor::Codeedu(_) => TutorKind::Codeedu,
            Tutor::Baseline => TutorKind::Baseline,
        }
    }
}

fn intake_for(student: &SimulatedStudent, problem: &Problem) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("background".into(), format!("simulated {} level programming student", student.level));
    m.insert("goals".into(), format!("learn what is needed to solve problem {}", problem.problem_id));
    m.insert("level".into(), student.level.as_str().into());
    m.insert("topics".into(), problem.tags.join(", "));
    m
}

fn baseline_reply(gateway: &Gateway, dialogue: &[Exchange], message: &str) -> Result<String, EvalError> {
    let binding = gateway.binding(BASELINE_ROLE)?;
    let mut msgs = vec![ChatMessage::system(crate::prompts::BASELINE_TUTOR)];
    for e in dialogue {
        msgs.push(ChatMessage::user(e.student.clone()));
        msgs.push(ChatMessage::assistant(e.tutor.clone()));
    }
    msgs.push(ChatMessage::user(message));
    Ok(gateway.complete(&binding, &msgs)?.text.trim().to_string())
}

fn dialogue_excerpt(dialogue: &[Exchange]) -> String {
    let start = dialogue.len().saturating_sub(3);
    dialogue[start..]
        .iter()
        .map(|e| format!("student: {}\ntutor: {}", e.student, e.tutor))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Up to T turns of dialogue with an early-stop check after each, then K
/// graded submissions.
pub fn run_episode(
    student: &SimulatedStudent,
    tutor: &Tutor<'_>,
    gateway: &Gateway,
    grader: &Grader,
    problem: &Problem,
    config: &EvalConfig,
) -> Result<EpisodeResult, EvalError> {
    let mut dialogue: Vec<Exchange> = Vec::new();
    let mut stopped_early = false;
    let mut material = None;
    let mut profile = None;
    match tutor {
        Tutor::Codeedu(engine) => {
            let mut session = engine.start_session(&intake_for(student, problem))?;
            material = Some(engine.generate_material(&mut session)?);
            profile = Some(session.profile().clone());
            for turn in 1..=config.turns {
                let message = student.speak(gateway, &dialogue, turn, config.turns)?;
                let answer = engine.answer_question(&mut session, &message)?;
                dialogue.push(Exchange { student: message, tutor: answer });
                if engine.should_stop_early(&session) {
                    stopped_early = turn < config.turns;
                    break;
                }
            }
        }
        Tutor::Baseline => {
            for turn in 1..=config.turns {
                let message = student.speak(gateway, &dialogue, turn, config.turns)?;
                let answer = baseline_reply(gateway, &dialogue, &message)?;
                dialogue.push(Exchange { student: message, tutor: answer });
                if check_stop(gateway, turn, config.turns, &dialogue_excerpt(&dialogue)) {
                    stopped_early = turn < config.turns;
                    break;
                }
            }
        }
    }
    let post = submission_round(student, gateway, grader, problem, &dialogue, TestPhase::Post, config)?;
    Ok(EpisodeResult {
        tutor: tutor.kind(),
        problem_id: problem.problem_id.clone(),
        dialogue,
        stopped_early,
        post,
        material,
        profile,
    })
}

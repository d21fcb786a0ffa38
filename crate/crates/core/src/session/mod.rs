//! Tutoring sessions: intake, material generation, Q&A, step-by-step
//! exercises with feedback, and the learning report.
//!
//! A [`Session`] is plain state owned by one caller at a time; [`Engine`]
//! holds the shared registries and implements the operations.

mod engine;
mod exercise;
mod material;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use engine::{check_stop, Engine, EngineConfig, PlanningMode, DEFAULT_MAX_TURNS, STOP_CHECK_ROLE};
pub use exercise::{Exercise, ExerciseProgress, ExerciseStep, Feedback, NextAction};
pub use material::{LearningMaterial, MaterialSection, MODEL_INTERNAL};
pub use report::{parse_report_items, LearningReport, ReportItems, SubmissionSummary, TimelineEntry};

use crate::agents::AgentError;
use crate::conversation::ConversationHistory;
use crate::llm::LlmError;
use crate::planner::{PlanState, PlannerError, TaskType};
use crate::profile::StudentProfile;
use crate::tools::{SandboxError, ToolError};

pub const EVENTS_FILE: &str = "events.jsonl";
pub const MATERIAL_FILE: &str = "material.md";
pub const REPORT_FILE: &str = "report.md";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Intake,
    Studying,
    Exercising,
    Reporting,
    Closed,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Intake => "intake",
            Phase::Studying => "studying",
            Phase::Exercising => "exercising",
            Phase::Reporting => "reporting",
            Phase::Closed => "closed",
        }
    }

    /// Edges of the phase graph. Staying in the same phase is not a transition.
    pub fn can_transition(self, to: Phase) -> bool {
        use Phase::*;
        matches!(
            (self, to),
            (Intake, Studying)
                | (Studying, Exercising)
                | (Exercising, Studying)
                | (Studying, Reporting)
                | (Exercising, Reporting)
                | (Reporting, Closed)
        )
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Intake,
    Material,
    Question,
    Answer,
    Submission,
    Feedback,
    Report,
}

/// One line of `events.jsonl`. Every payload carries the session phase at
/// the time of the event under `"phase"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub ts: String,
    pub kind: EventKind,
    pub payload: Value,
}

impl Event {
    pub fn phase(&self) -> Option<Phase> {
        serde_json::from_value(self.payload.get("phase")?.clone()).ok()
    }
}

/// Called with the 1-based sequence number of every event as it is logged.
pub type EventObserver = Arc<dyn Fn(u64, &Event) + Send + Sync>;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("intake is missing required field `{0}`")]
    MissingIntakeField(String),
    #[error("intake field `{field}` is invalid: {message}")]
    InvalidIntakeField { field: String, message: String },
    #[error("{operation} is not allowed in phase {phase}")]
    PhaseViolation { operation: String, phase: Phase },
    #[error("turn limit of {max_turns} reached")]
    TurnLimitReached { max_turns: usize },
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("unknown exercise `{0}`")]
    UnknownExercise(String),
    #[error("exercise `{exercise_id}` is at step {expected}, not {got}")]
    StepMismatch {
        exercise_id: String,
        expected: usize,
        got: usize,
    },
    #[error("exercise `{0}` is already complete")]
    ExerciseComplete(String),
    #[error("nothing to report: the session has no activity beyond intake")]
    NothingToReport,
    #[error("no report has been generated")]
    NoReport,
    #[error("{task_type} task failed: {reason}")]
    TaskFailed { task_type: TaskType, reason: String },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("session storage: {0}")]
    Io(String),
}

impl From<std::io::Error> for SessionError {
    fn from(e: std::io::Error) -> Self {
        SessionError::Io(e.to_string())
    }
}

/// Live state of one student's session.
pub struct Session {
    pub(crate) session_id: String,
    pub(crate) profile: StudentProfile,
    pub(crate) phase: Phase,
    pub(crate) turn_count: usize,
    pub(crate) max_turns: usize,
    pub(crate) events: Vec<Event>,
    pub(crate) workspace_root: PathBuf,
    pub(crate) material: Option<LearningMaterial>,
    pub(crate) exercises: Vec<Exercise>,
    pub(crate) progress: BTreeMap<String, ExerciseProgress>,
    pub(crate) plan: PlanState,
    pub(crate) history: ConversationHistory,
    pub(crate) report: Option<LearningReport>,
    pub(crate) observer: Option<EventObserver>,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("session_id", &self.session_id)
            .field("phase", &self.phase)
            .field("turn_count", &self.turn_count)
            .field("max_turns", &self.max_turns)
            .field("events", &self.events.len())
            .field("workspace_root", &self.workspace_root)
            .finish()
    }
}

impl Session {
    pub fn id(&self) -> &str {
        &self.session_id
    }

    pub fn profile(&self) -> &StudentProfile {
        &self.profile
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn turn_count(&self) -> usize {
        self.turn_count
    }

    pub fn max_turns(&self) -> usize {
        self.max_turns
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn workspace_root(&self) -> &Path {
        &self.workspace_root
    }

    pub fn material(&self) -> Option<&LearningMaterial> {
        self.material.as_ref()
    }

    pub fn exercises(&self) -> &[Exercise] {
        &self.exercises
    }

    pub fn exercise(&self, exercise_id: &str) -> Option<&Exercise> {
        self.exercises.iter().find(|e| e.exercise_id == exercise_id)
    }

    pub fn progress(&self, exercise_id: &str) -> Option<&ExerciseProgress> {
        self.progress.get(exercise_id)
    }

    pub fn plan(&self) -> &PlanState {
        &self.plan
    }

    pub fn history(&self) -> &ConversationHistory {
        &self.history
    }

    pub fn report(&self) -> Option<&LearningReport> {
        self.report.as_ref()
    }

    /// Registers a callback for events logged from now on.
    pub fn set_observer(&mut self, observer: EventObserver) {
        self.observer = Some(observer);
    }

    pub(crate) fn transition(&mut self, to: Phase, operation: &str) -> Result<(), SessionError> {
        if self.phase == to {
            return Ok(());
        }
        if !self.phase.can_transition(to) {
            return Err(SessionError::PhaseViolation {
                operation: operation.into(),
                phase: self.phase,
            });
        }
        tracing::debug!(session = %self.session_id, from = %self.phase, %to, "phase transition");
        self.phase = to;
        Ok(())
    }

    pub(crate) fn require_phase(&self, allowed: &[Phase], operation: &str) -> Result<(), SessionError> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(SessionError::PhaseViolation {
                operation: operation.into(),
                phase: self.phase,
            })
        }
    }

    /// Appends to the in-memory log and to `events.jsonl`.
    pub(crate) fn log(&mut self, kind: EventKind, mut payload: Value) -> Result<(), SessionError> {
        if let Value::Object(m) = &mut payload {
            m.insert("phase".into(), Value::String(self.phase.as_str().into()));
        }
        let event = Event {
            ts: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            kind,
            payload,
        };
        let line = serde_json::to_string(&event).expect("event serializes");
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.workspace_root.join(EVENTS_FILE))?;
        writeln!(f, "{line}")?;
        f.flush()?;
        self.events.push(event);
        if let Some(obs) = &self.observer {
            obs(self.events.len() as u64, self.events.last().expect("just pushed"));
        }
        Ok(())
    }

    pub(crate) fn count_events(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Reads a persisted event log.
pub fn read_event_log(path: &Path) -> Result<Vec<Event>, SessionError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| SessionError::Io(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_graph_edges() {
        use Phase::*;
        let all = [Intake, Studying, Exercising, Reporting, Closed];
        let allowed: Vec<(Phase, Phase)> = all
            .iter()
            .flat_map(|a| all.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| a.can_transition(*b))
            .collect();
        assert_eq!(
            allowed,
            vec![
                (Intake, Studying),
                (Studying, Exercising),
                (Studying, Reporting),
                (Exercising, Studying),
                (Exercising, Reporting),
                (Reporting, Closed),
            ]
        );
    }
}

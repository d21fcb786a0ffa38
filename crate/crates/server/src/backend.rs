//! What the HTTP layer needs from the orchestrator, and the engine-backed
//! implementation.
//!
//! Each session lives behind its own mutex, so mutations on one session run
//! one at a time while different sessions proceed in parallel. Logged events
//! are copied into a per-session frame log as they happen; streams read that
//! log and never take the session lock.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use codeedu_core::profile::StudentProfile;
use codeedu_core::session::{Engine, Event, Feedback, LearningMaterial, LearningReport, Phase, Session};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFrame {
    pub sequence_number: u64,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub prompt: String,
    pub hint: String,
    pub case_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseView {
    pub exercise_id: String,
    pub title: String,
    pub statement: String,
    pub steps: Vec<StepView>,
    pub current_step: usize,
    pub attempts: usize,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub phase: Phase,
    pub turn_count: usize,
    pub max_turns: usize,
    pub profile: StudentProfile,
    pub exercises: Vec<ExerciseView>,
    pub has_material: bool,
    pub has_report: bool,
    /// Sequence number of the latest event.
    pub last_sequence: u64,
}

impl SessionView {
    pub fn of(session: &Session) -> Self {
        let exercises = session
            .exercises()
            .iter()
            .map(|ex| {
                let progress = session.progress(&ex.exercise_id).cloned().unwrap_or_default();
                ExerciseView {
                    exercise_id: ex.exercise_id.clone(),
                    title: ex.title.clone(),
                    statement: ex.statement.clone(),
                    steps: ex
                        .steps
                        .iter()
                        .map(|s| StepView {
                            prompt: s.prompt.clone(),
                            hint: s.hint.clone(),
                            case_count: s.cases.len(),
                        })
                        .collect(),
                    current_step: progress.current_step,
                    attempts: progress.attempts,
                    completed: progress.completed,
                }
            })
            .collect();
        Self {
            session_id: session.id().to_string(),
            phase: session.phase(),
            turn_count: session.turn_count(),
            max_turns: session.max_turns(),
            profile: session.profile().clone(),
            exercises,
            has_material: session.material().is_some(),
            has_report: session.report().is_some(),
            last_sequence: session.events().len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageReply {
    pub answer: String,
    pub turn_count: usize,
    pub max_turns: usize,
}

/// Phase switches a client may request directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseChange {
    Exercising,
    Studying,
    Closed,
}

/// Orchestrator operations behind the HTTP API. Calls block; the router
/// runs them off the async executor.
pub trait Backend: Send + Sync + 'static {
    fn create_session(&self, intake: BTreeMap<String, String>) -> Result<SessionView, ApiError>;
    fn session(&self, session_id: &str) -> Result<SessionView, ApiError>;
    fn post_message(&self, session_id: &str, text: &str) -> Result<MessageReply, ApiError>;
    fn generate_material(&self, session_id: &str) -> Result<LearningMaterial, ApiError>;
    fn submit_code(
        &self,
        session_id: &str,
        exercise_id: &str,
        step_index: usize,
        source: &str,
    ) -> Result<Feedback, ApiError>;
    fn change_phase(&self, session_id: &str, to: PhaseChange) -> Result<SessionView, ApiError>;
    fn generate_report(&self, session_id: &str) -> Result<LearningReport, ApiError>;
    /// The report Markdown exactly as stored.
    fn report(&self, session_id: &str) -> Result<String, ApiError>;
    /// Frames with `sequence_number >= from`, in order.
    fn frames(&self, session_id: &str, from: u64) -> Result<Vec<EventFrame>, ApiError>;
    /// Latest sequence number, updated as events are logged.
    fn watch(&self, session_id: &str) -> Result<watch::Receiver<u64>, ApiError>;
}

struct Slot {
    session: Mutex<Session>,
    log: Arc<RwLock<Vec<Event>>>,
    latest: Arc<watch::Sender<u64>>,
}

pub struct EngineBackend {
    engine: Engine,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

impl EngineBackend {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn slot(&self, session_id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(session_id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(session_id))
    }

    fn with_session<T>(
        &self,
        session_id: &str,
        op: impl FnOnce(&Engine, &mut Session) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let slot = self.slot(session_id)?;
        let mut session = slot
            .session
            .lock()
            .map_err(|_| ApiError::internal("session state is unavailable after an earlier failure"))?;
        op(&self.engine, &mut session)
    }
}

impl Backend for EngineBackend {
    fn create_session(&self, intake: BTreeMap<String, String>) -> Result<SessionView, ApiError> {
        let mut session = self.engine.start_session(&intake)?;
        let log = Arc::new(RwLock::new(session.events().to_vec()));
        let latest = Arc::new(watch::Sender::new(session.events().len() as u64));
        let (obs_log, obs_latest) = (log.clone(), latest.clone());
        session.set_observer(Arc::new(move |seq, event| {
            obs_log.write().expect("frame log poisoned").push(event.clone());
            obs_latest.send_replace(seq);
        }));
        let view = SessionView::of(&session);
        let slot = Arc::new(Slot {
            session: Mutex::new(session),
            log,
            latest,
        });
        self.sessions
            .write()
            .expect("session table poisoned")
            .insert(view.session_id.clone(), slot);
        Ok(view)
    }

    fn session(&self, session_id: &str) -> Result<SessionView, ApiError> {
        self.with_session(session_id, |_, s| Ok(SessionView::of(s)))
    }

    fn post_message(&self, session_id: &str, text: &str) -> Result<MessageReply, ApiError> {
        self.with_session(session_id, |engine, s| {
            let answer = engine.answer_question(s, text)?;
            Ok(MessageReply {
                answer,
                turn_count: s.turn_count(),
                max_turns: s.max_turns(),
            })
        })
    }

    fn generate_material(&self, session_id: &str) -> Result<LearningMaterial, ApiError> {
        self.with_session(session_id, |engine, s| Ok(engine.generate_material(s)?))
    }

    fn submit_code(
        &self,
        session_id: &str,
        exercise_id: &str,
        step_index: usize,
        source: &str,
    ) -> Result<Feedback, ApiError> {
        self.with_session(session_id, |engine, s| {
            Ok(engine.submit_code(s, exercise_id, step_index, source)?)
        })
    }

    fn change_phase(&self, session_id: &str, to: PhaseChange) -> Result<SessionView, ApiError> {
        self.with_session(session_id, |engine, s| {
            match to {
                PhaseChange::Exercising => engine.begin_exercises(s)?,
                PhaseChange::Studying => engine.resume_studying(s)?,
                PhaseChange::Closed => engine.close_session(s)?,
            }
            Ok(SessionView::of(s))
        })
    }

    fn generate_report(&self, session_id: &str) -> Result<LearningReport, ApiError> {
        self.with_session(session_id, |engine, s| Ok(engine.generate_report(s)?))
    }

    fn report(&self, session_id: &str) -> Result<String, ApiError> {
        self.with_session(session_id, |engine, s| Ok(engine.read_report(s)?))
    }

    fn frames(&self, session_id: &str, from: u64) -> Result<Vec<EventFrame>, ApiError> {
        let slot = self.slot(session_id)?;
        let log = slot.log.read().expect("frame log poisoned");
        let start = from.max(1);
        Ok(log
            .iter()
            .enumerate()
            .map(|(i, e)| (i as u64 + 1, e))
            .filter(|(seq, _)| *seq >= start)
            .map(|(sequence_number, e)| EventFrame {
                sequence_number,
                event: e.clone(),
            })
            .collect())
    }

    fn watch(&self, session_id: &str) -> Result<watch::Receiver<u64>, ApiError> {
        Ok(self.slot(session_id)?.latest.subscribe())
    }
}

//! Session operations over the shared agent, tool and model registries.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::exercise::{Exercise, ExerciseProgress, Feedback, NextAction};
use super::material::LearningMaterial;
use super::report::{self, LearningReport};
use super::{EventKind, Phase, Session, SessionError, MATERIAL_FILE, REPORT_FILE};
use crate::agents::{run_agent_task, AgentPool, AgentRuntime, OutcomeStatus, TaskOutcome, DEFAULT_MAX_STEPS};
use crate::conversation::ConversationHistory;
use crate::dataset::Problem;
use crate::llm::{ChatMessage, Gateway};
use crate::planner::{self, assign, DecomposeMode, PlanEvent, PlanState, TaskSpec, TaskType};
use crate::profile::{Level, StudentProfile};
use crate::prompts::PromptSet;
use crate::tools::{
    CodeExecutor, CrawlEntry, Crawler, SandboxPolicy, TestReport, ToolContext, ToolInvoker, ToolPool,
    FILE_IO,
};

pub const DEFAULT_MAX_TURNS: usize = 20;
/// Role whose binding answers the early-stop check; falls back to the Tutor's.
pub const STOP_CHECK_ROLE: &str = "stop_check";
const MATERIAL_EXCERPT_CHARS: usize = 2000;
const STOP_CHECK_HISTORY: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanningMode {
    /// Deterministic canonical chains.
    Rules,
    /// The Planner agent proposes plans through its model binding.
    Llm,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Sessions live under `<root>/sessions/<id>/`.
    pub root: PathBuf,
    pub max_turns: usize,
    pub max_steps: usize,
    pub planning: PlanningMode,
    /// `session-0001`, `session-0002`, ... instead of random UUIDs, for
    /// reproducible runs.
    pub sequential_ids: bool,
}

impl EngineConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            max_turns: DEFAULT_MAX_TURNS,
            max_steps: DEFAULT_MAX_STEPS,
            planning: PlanningMode::Rules,
            sequential_ids: false,
        }
    }
}

/// Shared, read-only registries plus the session operations.
pub struct Engine {
    config: EngineConfig,
    gateway: Arc<Gateway>,
    tools: Arc<ToolPool>,
    agents: AgentPool,
    problems: Vec<Problem>,
    next_id: AtomicU64,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("config", &self.config)
            .field("agents", &self.agents.len())
            .field("problems", &self.problems.len())
            .finish()
    }
}

fn task_failed(task_type: TaskType, reason: impl Into<String>) -> SessionError {
    SessionError::TaskFailed {
        task_type,
        reason: reason.into(),
    }
}

impl Engine {
    /// Builds the tool pool and default agents and checks that every agent
    /// role has a model binding on a registered provider.
    pub fn new(
        config: EngineConfig,
        gateway: Arc<Gateway>,
        executor: Arc<dyn CodeExecutor>,
        crawler: Crawler,
        policy: SandboxPolicy,
        problems: Vec<Problem>,
        prompts: &PromptSet,
    ) -> Result<Self, SessionError> {
        let tools = Arc::new(ToolPool::new(gateway.clone(), executor, crawler, policy));
        let agents = AgentPool::with_defaults(prompts, tools.as_ref())?;
        let roles = agents.roles();
        gateway.validate_roles(roles.iter().map(String::as_str))?;
        std::fs::create_dir_all(config.root.join("sessions"))?;
        Ok(Self {
            config,
            gateway,
            tools,
            agents,
            problems,
            next_id: AtomicU64::new(1),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    pub fn tools(&self) -> &Arc<ToolPool> {
        &self.tools
    }

    pub fn agents(&self) -> &AgentPool {
        &self.agents
    }

    pub fn problems(&self) -> &[Problem] {
        &self.problems
    }

    fn new_session_id(&self) -> String {
        if self.config.sequential_ids {
            format!("session-{:04}", self.next_id.fetch_add(1, Ordering::SeqCst))
        } else {
            uuid::Uuid::new_v4().to_string()
        }
    }

    fn runtime(&self, session: &Session) -> AgentRuntime {
        let mut rt = AgentRuntime::new(
            self.gateway.clone(),
            self.tools.clone() as Arc<dyn ToolInvoker>,
            session.workspace_root.clone(),
        );
        rt.max_steps = self.config.max_steps;
        rt
    }

    /// Intake answers: `background` and `goals` are required; `level`
    /// (low/medium/high, default medium) and `topics` (comma separated) are
    /// optional.
    pub fn start_session(&self, answers: &BTreeMap<String, String>) -> Result<Session, SessionError> {
        let field = |name: &str| {
            answers
                .get(name)
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
        };
        let background = field("background").ok_or_else(|| SessionError::MissingIntakeField("background".into()))?;
        let goals = field("goals").ok_or_else(|| SessionError::MissingIntakeField("goals".into()))?;
        let level = match field("level") {
            Some(l) => l.parse::<Level>().map_err(|message| SessionError::InvalidIntakeField {
                field: "level".into(),
                message,
            })?,
            None => Level::Medium,
        };
        let topics: Vec<String> = field("topics")
            .map(|t| {
                t.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        let profile = StudentProfile::new(background, goals, level).with_topics(topics);

        let session_id = self.new_session_id();
        let workspace_root = self.config.root.join("sessions").join(&session_id);
        std::fs::create_dir_all(workspace_root.join("sandbox"))?;

        let exercises = self.select_exercises(&profile);
        let progress = exercises
            .iter()
            .map(|e| (e.exercise_id.clone(), ExerciseProgress::default()))
            .collect();
        let mut session = Session {
            session_id,
            profile,
            phase: Phase::Intake,
            turn_count: 0,
            max_turns: self.config.max_turns,
            events: Vec::new(),
            workspace_root,
            material: None,
            exercises,
            progress,
            plan: PlanState::default(),
            history: ConversationHistory::new(),
            report: None,
            observer: None,
        };
        session.transition(Phase::Studying, "start_session")?;
        let profile_json = serde_json::to_value(&session.profile).expect("profile serializes");
        session.log(EventKind::Intake, json!({ "profile": profile_json }))?;
        session
            .history
            .push_message(ChatMessage::user(format!("Intake\n{}", session.profile.describe())));
        Ok(session)
    }

    /// Dataset problems matching any preferred topic; all problems when
    /// none match or no topics were given.
    fn select_exercises(&self, profile: &StudentProfile) -> Vec<Exercise> {
        let matching: Vec<&Problem> = self
            .problems
            .iter()
            .filter(|p| profile.preferred_topics.iter().any(|t| p.matches_topic(t)))
            .collect();
        let chosen: Vec<&Problem> = if matching.is_empty() {
            self.problems.iter().collect()
        } else {
            matching
        };
        chosen.into_iter().map(Exercise::from_problem).collect()
    }

    fn topic_of(profile: &StudentProfile) -> String {
        profile
            .preferred_topics
            .first()
            .cloned()
            .unwrap_or_else(|| profile.goals.clone())
    }

    fn fresh_task_id(plan: &PlanState, prefix: &str) -> String {
        let mut n = plan.len() + 1;
        while plan.task(&format!("{prefix}{n}")).is_some() {
            n += 1;
        }
        format!("{prefix}{n}")
    }

    /// Assigns a ready task, runs it, and records the outcome in the plan and
    /// the conversation history.
    fn dispatch(
        &self,
        session: &mut Session,
        task_id: &str,
        extra_inputs: Map<String, Value>,
    ) -> Result<TaskOutcome, SessionError> {
        let mut task = session
            .plan
            .task(task_id)
            .cloned()
            .ok_or_else(|| planner::PlannerError::UnknownTask(task_id.into()))?;
        task.inputs.extend(extra_inputs);
        let agents = self.agents.list();
        let agent_id = assign(&task, &agents, &session.plan)?;
        session.plan.mark_running(task_id, &agent_id)?;
        let agent = self.agents.get(&agent_id)?;
        let rt = self.runtime(session);
        let result = run_agent_task(agent, &task, &session.history, &rt);
        match result {
            Ok(outcome) if outcome.status == OutcomeStatus::Done => {
                session.plan.on_event(&PlanEvent::TaskCompleted {
                    task_id: task_id.into(),
                    agent_id: agent_id.clone(),
                })?;
                session.history.push_outcome(&agent_id, &outcome);
                Ok(outcome)
            }
            Ok(outcome) => {
                session.plan.on_event(&PlanEvent::TaskFailed { task_id: task_id.into() })?;
                session.history.push_outcome(&agent_id, &outcome);
                let reason = match outcome.status {
                    OutcomeStatus::NeedsUserInput => format!(
                        "agent asked for input: {}",
                        outcome.artifacts.get("question").and_then(Value::as_str).unwrap_or_default()
                    ),
                    _ => outcome
                        .artifacts
                        .get("error")
                        .and_then(Value::as_str)
                        .unwrap_or("agent failed")
                        .to_string(),
                };
                Err(task_failed(task.task_type, reason))
            }
            Err(e) => {
                session.plan.on_event(&PlanEvent::TaskFailed { task_id: task_id.into() })?;
                Err(e.into())
            }
        }
    }

    fn add_single_task(
        &self,
        session: &mut Session,
        prefix: &str,
        task_type: TaskType,
        description: String,
    ) -> Result<String, SessionError> {
        let id = Self::fresh_task_id(&session.plan, prefix);
        session.plan.add_task(TaskSpec::new(&id, task_type, description))?;
        Ok(id)
    }

    pub fn generate_material(&self, session: &mut Session) -> Result<LearningMaterial, SessionError> {
        session.require_phase(&[Phase::Studying], "generate_material")?;
        let topic = Self::topic_of(&session.profile);
        let request = format!("teach me {topic}");
        let mode = match self.config.planning {
            PlanningMode::Rules => DecomposeMode::RuleBased,
            PlanningMode::Llm => DecomposeMode::LlmAssisted(&self.gateway),
        };
        let proposed = planner::decompose(&request, &session.profile, &session.history, mode)?;

        // Keep the retrieval and material tasks; the rest of the chain is
        // driven by exercises and the report later on.
        let wanted = [TaskType::KnowledgeRetrieval, TaskType::MaterialGeneration];
        let kept: BTreeSet<String> = proposed
            .iter()
            .filter(|t| wanted.contains(&t.task_type))
            .map(|t| t.task_id.clone())
            .collect();
        if !proposed.iter().any(|t| t.task_type == TaskType::MaterialGeneration) {
            return Err(task_failed(TaskType::MaterialGeneration, "plan has no material_generation task"));
        }
        let prefix = Self::fresh_task_id(&session.plan, "m") + ".";
        let renamed: Vec<TaskSpec> = proposed
            .into_iter()
            .filter(|t| kept.contains(&t.task_id))
            .map(|mut t| {
                t.task_id = format!("{prefix}{}", t.task_id);
                t.depends_on = t
                    .depends_on
                    .iter()
                    .filter(|d| kept.contains(*d))
                    .map(|d| format!("{prefix}{d}"))
                    .collect();
                t
            })
            .collect();
        let ids: BTreeSet<String> = renamed.iter().map(|t| t.task_id.clone()).collect();
        session.plan.add_tasks(renamed)?;

        let mut sources: Vec<CrawlEntry> = Vec::new();
        let mut material_artifact: Option<Value> = None;
        loop {
            let Some(task) = session
                .plan
                .next_ready()
                .into_iter()
                .find(|t| ids.contains(&t.task_id))
            else {
                break;
            };
            let mut extra = Map::new();
            extra.insert("topic".into(), Value::String(topic.clone()));
            extra.insert("profile".into(), Value::String(session.profile.describe()));
            if task.task_type == TaskType::MaterialGeneration {
                let refs: Vec<Value> = sources
                    .iter()
                    .map(|s| json!({"url": s.url, "title": s.title, "snippet": s.snippet}))
                    .collect();
                extra.insert("sources".into(), Value::Array(refs));
            }
            let outcome = self.dispatch(session, &task.task_id, extra)?;
            if let Some(crawl) = outcome.tool_output(crate::tools::WEB_CRAWLER) {
                let entries: Vec<CrawlEntry> = crawl
                    .get("entries")
                    .cloned()
                    .and_then(|v| serde_json::from_value(v).ok())
                    .unwrap_or_default();
                for e in entries {
                    if !sources.iter().any(|s| s.url == e.url) {
                        sources.push(e);
                    }
                }
            }
            if task.task_type == TaskType::MaterialGeneration {
                material_artifact = outcome.result().cloned();
            }
        }

        let artifact = material_artifact
            .ok_or_else(|| task_failed(TaskType::MaterialGeneration, "no material produced"))?;
        let known: BTreeSet<String> = sources.iter().map(|s| s.url.clone()).collect();
        let material = LearningMaterial::from_artifact(&artifact, &topic, &known, &session.session_id)
            .ok_or_else(|| task_failed(TaskType::MaterialGeneration, "material has no usable sections"))?;
        crate::tools::write_file(&session.workspace_root, MATERIAL_FILE, &material.to_markdown())
            .map_err(crate::tools::ToolError::from)?;
        // Full sections, so a client can rebuild the material view from the log.
        session.log(
            EventKind::Material,
            json!({
                "topic": material.topic,
                "sections": material.sections,
                "path": MATERIAL_FILE,
            }),
        )?;
        session.material = Some(material.clone());
        Ok(material)
    }

    fn consume_turn(&self, session: &Session) -> Result<(), SessionError> {
        if session.turn_count >= session.max_turns {
            return Err(SessionError::TurnLimitReached {
                max_turns: session.max_turns,
            });
        }
        Ok(())
    }

    pub fn answer_question(&self, session: &mut Session, question: &str) -> Result<String, SessionError> {
        session.require_phase(&[Phase::Studying, Phase::Exercising], "answer_question")?;
        let question = question.trim();
        if question.is_empty() {
            return Err(SessionError::EmptyQuestion);
        }
        self.consume_turn(session)?;
        session.turn_count += 1;
        session.log(EventKind::Question, json!({ "text": question, "turn": session.turn_count }))?;

        let created = session.plan.on_event(&PlanEvent::UserMessage { text: question.into() })?;
        let task_id = created.into_iter().next().expect("user message creates a task");
        let mut extra = Map::new();
        extra.insert("profile".into(), Value::String(session.profile.describe()));
        if let Some(m) = &session.material {
            extra.insert("material".into(), Value::String(m.excerpt(MATERIAL_EXCERPT_CHARS)));
        }
        let outcome = self.dispatch(session, &task_id, extra)?;
        let answer = outcome
            .result_text()
            .ok_or_else(|| task_failed(TaskType::TutoringQa, "no answer produced"))?;
        session.history.push_message(ChatMessage::user(question));
        session
            .history
            .push_message(ChatMessage::assistant(answer.clone()).authored_by(crate::agents::TUTOR));
        session.log(EventKind::Answer, json!({ "text": answer, "turn": session.turn_count }))?;
        Ok(answer)
    }

    /// Moves the session into the exercise phase.
    pub fn begin_exercises(&self, session: &mut Session) -> Result<(), SessionError> {
        session.transition(Phase::Exercising, "begin_exercises")
    }

    /// Returns from exercises to studying.
    pub fn resume_studying(&self, session: &mut Session) -> Result<(), SessionError> {
        session.transition(Phase::Studying, "resume_studying")
    }

    /// Grades `source` against the current step of an exercise and asks the
    /// Programmer for suggestions.
    pub fn submit_code(
        &self,
        session: &mut Session,
        exercise_id: &str,
        step_index: usize,
        source: &str,
    ) -> Result<Feedback, SessionError> {
        session.require_phase(&[Phase::Exercising], "submit_code")?;
        let exercise = session
            .exercise(exercise_id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownExercise(exercise_id.into()))?;
        let progress = session.progress.get(exercise_id).cloned().unwrap_or_default();
        if progress.completed {
            return Err(SessionError::ExerciseComplete(exercise_id.into()));
        }
        if step_index != progress.current_step {
            return Err(SessionError::StepMismatch {
                exercise_id: exercise_id.into(),
                expected: progress.current_step,
                got: step_index,
            });
        }
        self.consume_turn(session)?;
        let step = &exercise.steps[step_index];
        let verdict: TestReport = self.tools.run_unit_tests(source, &step.cases)?;

        session.turn_count += 1;
        session.log(
            EventKind::Submission,
            json!({
                "exercise_id": exercise_id,
                "step_index": step_index,
                "source": source,
                "turn": session.turn_count,
            }),
        )?;

        let last_step = step_index + 1 == exercise.steps.len();
        let next_action = match (verdict.all_passed, last_step) {
            (false, _) => NextAction::RetryStep,
            (true, false) => NextAction::AdvanceStep,
            (true, true) => NextAction::ExerciseComplete,
        };

        let task_id = self.add_single_task(
            session,
            "d",
            TaskType::DebuggingReview,
            format!("Review a submission for {} step {}", exercise_id, step_index + 1),
        )?;
        let case_lines: Vec<Value> = verdict
            .runs
            .iter()
            .zip(&step.cases)
            .map(|(run, case)| {
                json!({
                    "passed": run.passed,
                    "input": case.input,
                    "expected": case.expected_output,
                    "actual": run.stdout,
                    "stderr": run.stderr.chars().take(400).collect::<String>(),
                })
            })
            .collect();
        let mut extra = Map::new();
        extra.insert("statement".into(), Value::String(exercise.statement.clone()));
        extra.insert("step".into(), Value::String(step.prompt.clone()));
        extra.insert("source".into(), Value::String(source.into()));
        extra.insert("cases".into(), Value::Array(case_lines));
        extra.insert("all_passed".into(), Value::Bool(verdict.all_passed));
        let outcome = self.dispatch(session, &task_id, extra)?;
        let mut suggestions = outcome.result_text().unwrap_or_default().trim().to_string();
        if suggestions.is_empty() && next_action == NextAction::RetryStep {
            suggestions = format!(
                "{} of {} cases failed. Hint: {}",
                verdict.case_results.len() - verdict.passed_count(),
                verdict.case_results.len(),
                step.hint
            );
        }

        let entry = session.progress.entry(exercise_id.to_string()).or_default();
        entry.attempts += 1;
        match next_action {
            NextAction::AdvanceStep => entry.current_step += 1,
            NextAction::ExerciseComplete => entry.completed = true,
            NextAction::RetryStep => {}
        }
        session.log(
            EventKind::Feedback,
            json!({
                "exercise_id": exercise_id,
                "step_index": step_index,
                "passed": verdict.passed_count(),
                "total": verdict.case_results.len(),
                "all_passed": verdict.all_passed,
                "case_results": verdict.case_results,
                "next_action": next_action,
                "suggestions": suggestions,
            }),
        )?;
        session.history.push_message(ChatMessage::user(format!(
            "Submitted code for {exercise_id} step {}",
            step_index + 1
        )));
        session
            .history
            .push_message(ChatMessage::assistant(suggestions.clone()).authored_by(crate::agents::PROGRAMMER));
        Ok(Feedback {
            exercise_id: exercise_id.into(),
            step_index,
            verdict,
            suggestions,
            next_action,
        })
    }

    /// Writes the learning report to `report.md` through the file tool and
    /// moves the session to the reporting phase.
    pub fn generate_report(&self, session: &mut Session) -> Result<LearningReport, SessionError> {
        session.require_phase(&[Phase::Studying, Phase::Exercising, Phase::Reporting], "generate_report")?;
        if session.events.iter().all(|e| e.kind == EventKind::Intake) {
            return Err(SessionError::NothingToReport);
        }
        let task_id = self.add_single_task(
            session,
            "r",
            TaskType::ReportGeneration,
            "Recommend next steps for the student".into(),
        )?;
        let mut extra = Map::new();
        extra.insert("profile".into(), Value::String(session.profile.describe()));
        extra.insert("questions".into(), json!(session.count_events(EventKind::Question)));
        extra.insert("submissions".into(), json!(session.count_events(EventKind::Submission)));
        if session.material.is_some() {
            extra.insert("material_path".into(), Value::String(MATERIAL_FILE.into()));
        }
        let outcome = self.dispatch(session, &task_id, extra)?;
        let recommendations = outcome
            .result_text()
            .filter(|t| !t.trim().is_empty())
            .unwrap_or_else(|| "Keep practicing with the exercises above.".into());

        session.transition(Phase::Reporting, "generate_report")?;
        let generated_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let mut report = report::build(session, &recommendations, &generated_at);
        let ctx = ToolContext {
            workspace_root: session.workspace_root.clone(),
            caller_role: crate::agents::REPORT_ANALYST.into(),
        };
        let mut args = Map::new();
        args.insert("mode".into(), Value::String("write".into()));
        args.insert("path".into(), Value::String(REPORT_FILE.into()));
        args.insert("content".into(), Value::String(report.content.clone()));
        self.tools.invoke(FILE_IO, &args, &ctx)?;
        report.path = session.workspace_root.join(REPORT_FILE);
        session.log(
            EventKind::Report,
            json!({
                "path": REPORT_FILE,
                "questions": report.questions.len(),
                "submissions": report.submissions.len(),
            }),
        )?;
        session.report = Some(report.clone());
        Ok(report)
    }

    /// Reads the written report back through the file tool.
    pub fn read_report(&self, session: &Session) -> Result<String, SessionError> {
        if session.report.is_none() {
            return Err(SessionError::NoReport);
        }
        let ctx = ToolContext {
            workspace_root: session.workspace_root.clone(),
            caller_role: crate::agents::REPORT_ANALYST.into(),
        };
        let mut args = Map::new();
        args.insert("mode".into(), Value::String("read".into()));
        args.insert("path".into(), Value::String(REPORT_FILE.into()));
        match self.tools.invoke(FILE_IO, &args, &ctx)? {
            crate::tools::ToolOutput::FileContents { content } => Ok(content),
            other => Err(SessionError::Io(format!("unexpected file tool output {other:?}"))),
        }
    }

    pub fn close_session(&self, session: &mut Session) -> Result<(), SessionError> {
        session.transition(Phase::Closed, "close_session")
    }

    /// Asks the stop-check model whether the learning objectives are met.
    pub fn should_stop_early(&self, session: &Session) -> bool {
        let context = format!(
            "{}\n\nRecent conversation:\n{}",
            session.profile.describe(),
            session.history.excerpt(STOP_CHECK_HISTORY)
        );
        check_stop(&self.gateway, session.turn_count, session.max_turns, &context)
    }
}

/// One early-stop query: the stop-check binding (or the Tutor's) sees
/// `[turn n/T]` and the context. A reply starting with STOP or YES means
/// stop; anything else, and any error, means continue.
pub fn check_stop(gateway: &Gateway, turn: usize, max_turns: usize, context: &str) -> bool {
    let Ok(binding) = gateway.binding_or(STOP_CHECK_ROLE, crate::agents::TUTOR) else {
        return false;
    };
    let messages = [
        ChatMessage::system(crate::prompts::STOP_CHECK),
        ChatMessage::user(format!("[turn {turn}/{max_turns}]\n{context}")),
    ];
    match gateway.complete(&binding, &messages) {
        Ok(r) => is_stop_reply(&r.text),
        Err(e) => {
            tracing::warn!(error = %e, "stop check failed; continuing");
            false
        }
    }
}

pub(crate) fn is_stop_reply(text: &str) -> bool {
    let first = text
        .trim()
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_ascii_uppercase();
    first == "STOP" || first == "YES"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_reply_parsing() {
        assert!(is_stop_reply("STOP"));
        assert!(is_stop_reply("yes."));
        assert!(is_stop_reply("  Yes, the objectives are met"));
        assert!(!is_stop_reply("maybe"));
        assert!(!is_stop_reply("NO"));
        assert!(!is_stop_reply(""));
        assert!(!is_stop_reply("yesterday"));
    }
}

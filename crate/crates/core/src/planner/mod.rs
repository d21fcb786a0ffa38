//! Event-driven planner: typed tasks in a dependency DAG, readiness tracking,
//! and routing of ready tasks to the most suitable agent.

mod assign;
mod decompose;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use assign::{assign, required_tool, suitability};
pub use decompose::{
    canonical_chain, decompose, is_question, parse_plan, DecomposeMode, CANONICAL_CHAIN,
};

use crate::llm::LlmError;

/// Priority given to question-answering tasks attached mid-plan, so they are
/// served before pending chain work.
pub const QA_PRIORITY: i32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    KnowledgeRetrieval,
    MaterialGeneration,
    TutoringQa,
    CodingExercise,
    DebuggingReview,
    ReportGeneration,
}

impl TaskType {
    pub const ALL: [TaskType; 6] = [
        TaskType::KnowledgeRetrieval,
        TaskType::MaterialGeneration,
        TaskType::TutoringQa,
        TaskType::CodingExercise,
        TaskType::DebuggingReview,
        TaskType::ReportGeneration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::KnowledgeRetrieval => "knowledge_retrieval",
            TaskType::MaterialGeneration => "material_generation",
            TaskType::TutoringQa => "tutoring_qa",
            TaskType::CodingExercise => "coding_exercise",
            TaskType::DebuggingReview => "debugging_review",
            TaskType::ReportGeneration => "report_generation",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub task_type: TaskType,
    pub description: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, Value>,
    #[serde(default)]
    pub depends_on: BTreeSet<String>,
    #[serde(default)]
    pub priority: i32,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, task_type: TaskType, description: impl Into<String>) -> Self {
        Self {
            task_id: task_id.into(),
            task_type,
            description: description.into(),
            inputs: BTreeMap::new(),
            depends_on: BTreeSet::new(),
            priority: 0,
        }
    }

    pub fn after<I, S>(mut self, deps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.depends_on.extend(deps.into_iter().map(Into::into));
        self
    }

    pub fn with_priority(mut self, priority: i32) -> Self {
        self.priority = priority;
        self
    }

    pub fn with_input(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Ready,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum PlanEvent {
    TaskCompleted { task_id: String, agent_id: String },
    TaskFailed { task_id: String },
    UserMessage { text: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("request must not be empty")]
    EmptyRequest,
    #[error("unknown task id `{0}`")]
    UnknownTask(String),
    #[error("task `{0}` is already in the plan")]
    DuplicateTask(String),
    #[error("task `{task}` depends on unknown task `{dependency}`")]
    UnknownDependency { task: String, dependency: String },
    #[error("task `{0}` depends on itself")]
    SelfDependency(String),
    #[error("adding `{task}` -> `{dependency}` would create a cycle")]
    Cycle { task: String, dependency: String },
    #[error("task `{task}` cannot go from {from:?} to {to:?}")]
    InvalidTransition {
        task: String,
        from: TaskStatus,
        to: TaskStatus,
    },
    #[error("no agent can handle {0} tasks")]
    NoCapableAgent(TaskType),
    #[error("plan decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// JSON view of a plan for audit and UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSnapshot {
    pub tasks: Vec<TaskSpec>,
    pub statuses: BTreeMap<String, TaskStatus>,
    pub assignments: BTreeMap<String, String>,
    /// `[dependency, dependent]` pairs.
    pub edges: Vec<(String, String)>,
}

/// Tasks of one session, their statuses, and agent assignments.
///
/// `Ready` is kept explicitly: a task is `Ready` exactly when it is not yet
/// started and every dependency is `Done`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanState {
    tasks: BTreeMap<String, TaskSpec>,
    status: BTreeMap<String, TaskStatus>,
    assignments: BTreeMap<String, String>,
}

impl PlanState {
    pub fn new(tasks: impl IntoIterator<Item = TaskSpec>) -> Result<Self, PlannerError> {
        let mut plan = Self::default();
        plan.add_tasks(tasks)?;
        Ok(plan)
    }

    /// Adds tasks atomically; dependencies may point at tasks in the same
    /// batch or already in the plan.
    pub fn add_tasks(&mut self, tasks: impl IntoIterator<Item = TaskSpec>) -> Result<(), PlannerError> {
        let mut next = self.clone();
        let batch: Vec<TaskSpec> = tasks.into_iter().collect();
        for t in &batch {
            if next.tasks.contains_key(&t.task_id) {
                return Err(PlannerError::DuplicateTask(t.task_id.clone()));
            }
            next.tasks.insert(t.task_id.clone(), t.clone());
            next.status.insert(t.task_id.clone(), TaskStatus::Pending);
        }
        for t in &batch {
            for d in &t.depends_on {
                if d == &t.task_id {
                    return Err(PlannerError::SelfDependency(d.clone()));
                }
                if !next.tasks.contains_key(d) {
                    return Err(PlannerError::UnknownDependency {
                        task: t.task_id.clone(),
                        dependency: d.clone(),
                    });
                }
            }
        }
        if let Some((task, dependency)) = next.find_cycle_edge() {
            return Err(PlannerError::Cycle { task, dependency });
        }
        // A new task depending on a failed task can never run.
        for t in &batch {
            if t.depends_on
                .iter()
                .any(|d| next.status[d] == TaskStatus::Failed)
            {
                next.status.insert(t.task_id.clone(), TaskStatus::Failed);
            }
        }
        next.refresh_ready();
        *self = next;
        Ok(())
    }

    pub fn add_task(&mut self, task: TaskSpec) -> Result<(), PlannerError> {
        self.add_tasks([task])
    }

    /// Makes `task` wait for `dependency`. Rejected if it would close a cycle
    /// or if `task` has already started while `dependency` is unfinished.
    pub fn add_dependency(&mut self, task: &str, dependency: &str) -> Result<(), PlannerError> {
        self.known(task)?;
        self.known(dependency)?;
        if task == dependency {
            return Err(PlannerError::SelfDependency(task.into()));
        }
        if self.reaches(dependency, task) {
            return Err(PlannerError::Cycle {
                task: task.into(),
                dependency: dependency.into(),
            });
        }
        let from = self.status[task];
        let dep_status = self.status[dependency];
        if matches!(from, TaskStatus::Running | TaskStatus::Done) && dep_status != TaskStatus::Done {
            return Err(PlannerError::InvalidTransition {
                task: task.into(),
                from,
                to: TaskStatus::Pending,
            });
        }
        self.tasks
            .get_mut(task)
            .expect("known task")
            .depends_on
            .insert(dependency.into());
        if dep_status == TaskStatus::Failed && from != TaskStatus::Done {
            self.fail_with_dependents(task);
        }
        self.refresh_ready();
        Ok(())
    }

    fn known(&self, task_id: &str) -> Result<(), PlannerError> {
        if self.tasks.contains_key(task_id) {
            Ok(())
        } else {
            Err(PlannerError::UnknownTask(task_id.into()))
        }
    }

    /// True if `from` transitively depends on `to`.
    fn reaches(&self, from: &str, to: &str) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(t) = stack.pop() {
            if t == to {
                return true;
            }
            if !seen.insert(t) {
                continue;
            }
            if let Some(spec) = self.tasks.get(t) {
                stack.extend(spec.depends_on.iter().map(String::as_str));
            }
        }
        false
    }

    /// Some edge on a dependency cycle, if one exists.
    fn find_cycle_edge(&self) -> Option<(String, String)> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Closed,
        }
        let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
        for root in self.tasks.keys() {
            if marks.contains_key(root.as_str()) {
                continue;
            }
            // Iterative DFS; each frame is a task and its remaining dependencies.
            let mut stack: Vec<(&str, Vec<&str>)> = vec![(
                root,
                self.tasks[root].depends_on.iter().map(String::as_str).collect(),
            )];
            marks.insert(root, Mark::Open);
            while let Some((task, deps)) = stack.last_mut() {
                let task = *task;
                match deps.pop() {
                    Some(d) => match marks.get(d) {
                        Some(Mark::Open) => return Some((task.to_string(), d.to_string())),
                        Some(Mark::Closed) => {}
                        None => {
                            marks.insert(d, Mark::Open);
                            let next = self
                                .tasks
                                .get(d)
                                .map(|s| s.depends_on.iter().map(String::as_str).collect())
                                .unwrap_or_default();
                            stack.push((d, next));
                        }
                    },
                    None => {
                        marks.insert(task, Mark::Closed);
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle_edge().is_none()
    }

    fn deps_done(&self, task_id: &str) -> bool {
        self.tasks[task_id]
            .depends_on
            .iter()
            .all(|d| self.status.get(d) == Some(&TaskStatus::Done))
    }

    fn refresh_ready(&mut self) {
        let ids: Vec<String> = self.tasks.keys().cloned().collect();
        for id in ids {
            let st = self.status[&id];
            let ready = self.deps_done(&id);
            match st {
                TaskStatus::Pending if ready => {
                    self.status.insert(id, TaskStatus::Ready);
                }
                TaskStatus::Ready if !ready => {
                    self.status.insert(id, TaskStatus::Pending);
                }
                _ => {}
            }
        }
    }

    fn fail_with_dependents(&mut self, task_id: &str) {
        let mut stack = vec![task_id.to_string()];
        while let Some(t) = stack.pop() {
            self.status.insert(t.clone(), TaskStatus::Failed);
            for (id, spec) in &self.tasks {
                if spec.depends_on.contains(&t)
                    && !matches!(self.status[id], TaskStatus::Failed | TaskStatus::Done)
                {
                    stack.push(id.clone());
                }
            }
        }
    }

    /// Ready tasks ordered by priority (highest first), then task id.
    pub fn next_ready(&self) -> Vec<TaskSpec> {
        let mut ready: Vec<&TaskSpec> = self
            .tasks
            .values()
            .filter(|t| self.status[&t.task_id] == TaskStatus::Ready)
            .collect();
        ready.sort_by(|a, b| b.priority.cmp(&a.priority).then(a.task_id.cmp(&b.task_id)));
        ready.into_iter().cloned().collect()
    }

    /// Hands a ready task to an agent.
    pub fn mark_running(&mut self, task_id: &str, agent_id: &str) -> Result<(), PlannerError> {
        self.known(task_id)?;
        let from = self.status[task_id];
        if from != TaskStatus::Ready {
            return Err(PlannerError::InvalidTransition {
                task: task_id.into(),
                from,
                to: TaskStatus::Running,
            });
        }
        self.status.insert(task_id.into(), TaskStatus::Running);
        self.assignments.insert(task_id.into(), agent_id.into());
        Ok(())
    }

    /// Applies an event. Returns the ids of tasks created by the event.
    pub fn on_event(&mut self, event: &PlanEvent) -> Result<Vec<String>, PlannerError> {
        match event {
            PlanEvent::TaskCompleted { task_id, agent_id } => {
                self.known(task_id)?;
                let from = self.status[task_id];
                if !matches!(from, TaskStatus::Ready | TaskStatus::Running) {
                    return Err(PlannerError::InvalidTransition {
                        task: task_id.clone(),
                        from,
                        to: TaskStatus::Done,
                    });
                }
                self.status.insert(task_id.clone(), TaskStatus::Done);
                self.assignments.insert(task_id.clone(), agent_id.clone());
                self.refresh_ready();
                Ok(Vec::new())
            }
            PlanEvent::TaskFailed { task_id } => {
                self.known(task_id)?;
                let from = self.status[task_id];
                if from == TaskStatus::Done {
                    return Err(PlannerError::InvalidTransition {
                        task: task_id.clone(),
                        from,
                        to: TaskStatus::Failed,
                    });
                }
                self.fail_with_dependents(task_id);
                Ok(Vec::new())
            }
            PlanEvent::UserMessage { text } => {
                let mut n = self.tasks.len() + 1;
                while self.tasks.contains_key(&format!("qa{n}")) {
                    n += 1;
                }
                let id = format!("qa{n}");
                let task = TaskSpec::new(&id, TaskType::TutoringQa, text.clone())
                    .with_input("question", text.clone())
                    .with_priority(QA_PRIORITY);
                self.add_task(task)?;
                Ok(vec![id])
            }
        }
    }

    pub fn task(&self, task_id: &str) -> Option<&TaskSpec> {
        self.tasks.get(task_id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskSpec> {
        self.tasks.values()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn status(&self, task_id: &str) -> Option<TaskStatus> {
        self.status.get(task_id).copied()
    }

    pub fn assignment(&self, task_id: &str) -> Option<&str> {
        self.assignments.get(task_id).map(String::as_str)
    }

    /// Number of running tasks assigned to `agent_id`.
    pub fn running_on(&self, agent_id: &str) -> usize {
        self.assignments
            .iter()
            .filter(|(t, a)| a.as_str() == agent_id && self.status[t.as_str()] == TaskStatus::Running)
            .count()
    }

    /// Every task is done or failed.
    pub fn is_finished(&self) -> bool {
        self.status
            .values()
            .all(|s| matches!(s, TaskStatus::Done | TaskStatus::Failed))
    }

    pub fn all_done(&self) -> bool {
        self.status.values().all(|s| *s == TaskStatus::Done)
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let Some((a, b)) = self.find_cycle_edge() {
            return Err(format!("cycle through {a} -> {b}"));
        }
        for (id, spec) in &self.tasks {
            if spec.depends_on.contains(id) {
                return Err(format!("{id} depends on itself"));
            }
            if let Some(d) = spec.depends_on.iter().find(|d| !self.tasks.contains_key(*d)) {
                return Err(format!("{id} depends on unknown {d}"));
            }
            let st = self.status[id];
            let deps_done = self.deps_done(id);
            match st {
                TaskStatus::Ready if !deps_done => return Err(format!("{id} ready with unfinished deps")),
                TaskStatus::Pending if deps_done => return Err(format!("{id} pending with deps done")),
                TaskStatus::Running | TaskStatus::Done if !deps_done => {
                    return Err(format!("{id} started before its dependencies finished"))
                }
                TaskStatus::Done if !self.assignments.contains_key(id) => {
                    return Err(format!("{id} done without an assignment"))
                }
                _ => {}
            }
            if st != TaskStatus::Failed
                && spec
                    .depends_on
                    .iter()
                    .any(|d| self.status[d] == TaskStatus::Failed)
            {
                return Err(format!("{id} is {st:?} but depends on a failed task"));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> PlanSnapshot {
        let mut edges = Vec::new();
        for spec in self.tasks.values() {
            for d in &spec.depends_on {
                edges.push((d.clone(), spec.task_id.clone()));
            }
        }
        PlanSnapshot {
            tasks: self.tasks.values().cloned().collect(),
            statuses: self.status.clone(),
            assignments: self.assignments.clone(),
            edges,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.snapshot()).expect("plan snapshot serializes")
    }
}

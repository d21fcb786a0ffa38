//! The agent pool: role-specialized agents with prompts, tool bindings and
//! capabilities, plus the act loop that runs one task on one agent.

mod act;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use act::{parse_action, run_agent_task, Action, AgentRuntime, DEFAULT_MAX_STEPS};

use crate::llm::{ChatMessage, LlmError};
use crate::planner::TaskType;
use crate::prompts::PromptSet;
use crate::tools::{self, ToolInvoker};

pub const PLANNER: &str = "planner";
pub const RESEARCHER: &str = "researcher";
pub const REPORT_ANALYST: &str = "report_analyst";
pub const PROGRAMMER: &str = "programmer";
pub const TUTOR: &str = "tutor";

pub const DEFAULT_ROLES: [&str; 5] = [PLANNER, RESEARCHER, REPORT_ANALYST, PROGRAMMER, TUTOR];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub agent_id: String,
    /// Selects the model binding and the prompt asset.
    pub role_name: String,
    pub role_prompt: String,
    pub tool_bindings: BTreeSet<String>,
    pub capabilities: BTreeSet<TaskType>,
}

impl AgentProfile {
    pub fn new(agent_id: impl Into<String>, role_name: impl Into<String>, role_prompt: impl Into<String>) -> Self {
        Self {
            agent_id: agent_id.into(),
            role_name: role_name.into(),
            role_prompt: role_prompt.into(),
            tool_bindings: BTreeSet::new(),
            capabilities: BTreeSet::new(),
        }
    }

    pub fn with_tools<I, S>(mut self, tools: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tool_bindings.extend(tools.into_iter().map(Into::into));
        self
    }

    pub fn with_capabilities(mut self, caps: impl IntoIterator<Item = TaskType>) -> Self {
        self.capabilities.extend(caps);
        self
    }
}

/// The five default agents with their tool bindings and capabilities.
pub fn default_profiles(prompts: &PromptSet) -> Vec<AgentProfile> {
    let prompt = |role: &str| prompts.get(role).unwrap_or_default().to_string();
    vec![
        AgentProfile::new(PLANNER, PLANNER, prompt(PLANNER)),
        AgentProfile::new(RESEARCHER, RESEARCHER, prompt(RESEARCHER))
            .with_tools([tools::WEB_CRAWLER])
            .with_capabilities([TaskType::KnowledgeRetrieval, TaskType::MaterialGeneration]),
        AgentProfile::new(REPORT_ANALYST, REPORT_ANALYST, prompt(REPORT_ANALYST))
            .with_tools([tools::FILE_IO])
            .with_capabilities([TaskType::ReportGeneration]),
        AgentProfile::new(PROGRAMMER, PROGRAMMER, prompt(PROGRAMMER))
            .with_tools([tools::CODE_INTERPRETER])
            .with_capabilities([TaskType::CodingExercise, TaskType::DebuggingReview]),
        AgentProfile::new(TUTOR, TUTOR, prompt(TUTOR))
            .with_tools([tools::DEEP_RESEARCH])
            .with_capabilities([TaskType::TutoringQa]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Done,
    Failed,
    NeedsUserInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub status: OutcomeStatus,
    /// `result` holds the final artifact, `tool:<name>` the last output of
    /// each tool called, `question` a clarification request, `error` the
    /// reason for a failure.
    pub artifacts: BTreeMap<String, Value>,
    pub transcript: Vec<ChatMessage>,
}

impl TaskOutcome {
    pub fn result(&self) -> Option<&Value> {
        self.artifacts.get("result")
    }

    /// The final artifact as text: strings verbatim, other JSON serialized.
    pub fn result_text(&self) -> Option<String> {
        self.result().map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    pub fn tool_output(&self, tool: &str) -> Option<&Value> {
        self.artifacts.get(&format!("tool:{tool}"))
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent `{agent_id}` cannot handle {task_type} tasks")]
    CapabilityMismatch { agent_id: String, task_type: TaskType },
    #[error("tool `{tool}` failed: {message}")]
    ToolFailure { tool: String, message: String },
    #[error("agent `{agent_id}` did not finish within {max_steps} steps")]
    StepCapExceeded { agent_id: String, max_steps: usize },
    #[error("agent `{agent_id}` binds unregistered tool `{tool}`")]
    UnregisteredTool { agent_id: String, tool: String },
    #[error("agent `{0}` is already registered")]
    DuplicateAgent(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// Registry of agents keyed by id. Shared read-only once built.
#[derive(Debug, Clone, Default)]
pub struct AgentPool {
    agents: BTreeMap<String, AgentProfile>,
}

impl AgentPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defaults(prompts: &PromptSet, tools: &dyn ToolInvoker) -> Result<Self, AgentError> {
        let mut pool = Self::new();
        for p in default_profiles(prompts) {
            pool.register(p, tools)?;
        }
        Ok(pool)
    }

    pub fn register(&mut self, profile: AgentProfile, tools: &dyn ToolInvoker) -> Result<(), AgentError> {
        if self.agents.contains_key(&profile.agent_id) {
            return Err(AgentError::DuplicateAgent(profile.agent_id));
        }
        if let Some(t) = profile.tool_bindings.iter().find(|t| !tools.is_registered(t)) {
            return Err(AgentError::UnregisteredTool {
                agent_id: profile.agent_id.clone(),
                tool: t.clone(),
            });
        }
        self.agents.insert(profile.agent_id.clone(), profile);
        Ok(())
    }

    /// All agents ordered by id.
    pub fn list(&self) -> Vec<AgentProfile> {
        self.agents.values().cloned().collect()
    }

    pub fn get(&self, agent_id: &str) -> Result<&AgentProfile, AgentError> {
        self.agents
            .get(agent_id)
            .ok_or_else(|| AgentError::UnknownAgent(agent_id.into()))
    }

    /// Distinct role names, for binding validation at startup.
    pub fn roles(&self) -> BTreeSet<String> {
        self.agents.values().map(|a| a.role_name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

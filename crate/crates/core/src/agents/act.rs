//! The act loop.
//!
//! Each completion must contain one single-line JSON action:
//! `{"tool": "<name>", "arguments": {...}}`, `{"final": <artifact>}`, or
//! `{"ask_user": "<question>"}`. A reply with no parseable action gets one
//! repair prompt; a second one fails the task.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde_json::{Map, Value};

use super::{AgentError, AgentProfile, OutcomeStatus, TaskOutcome};
use crate::conversation::ConversationHistory;
use crate::llm::{ChatMessage, Gateway};
use crate::planner::TaskSpec;
use crate::tools::{ParamType, ToolContext, ToolInvoker};

pub const DEFAULT_MAX_STEPS: usize = 8;
const HISTORY_EXCERPT: usize = 8;

const PROTOCOL: &str = "Reply with exactly one line of JSON and nothing else:\n\
{\"tool\": \"<name>\", \"arguments\": {...}} to call one of your tools,\n\
{\"final\": <result>} when the task is finished,\n\
{\"ask_user\": \"<question>\"} if you need information only the student can give.";

const REPAIR: &str = "Your reply did not contain a valid action. Reply with one line of JSON: \
{\"tool\": ..., \"arguments\": ...}, {\"final\": ...} or {\"ask_user\": ...}.";

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Tool { name: String, arguments: Map<String, Value> },
    Final(Value),
    AskUser(String),
}

fn action_from_value(v: Value) -> Option<Action> {
    let Value::Object(mut obj) = v else { return None };
    if let Some(artifact) = obj.remove("final") {
        return Some(Action::Final(artifact));
    }
    if let Some(Value::String(q)) = obj.get("ask_user") {
        return Some(Action::AskUser(q.clone()));
    }
    if let Some(Value::String(name)) = obj.get("tool") {
        let arguments = match obj.get("arguments") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return None,
        };
        return Some(Action::Tool {
            name: name.clone(),
            arguments,
        });
    }
    None
}

/// First action found in `text`: the whole reply (minus code fences) if it
/// is one JSON object, otherwise the first line that is.
pub fn parse_action(text: &str) -> Option<Action> {
    let trimmed = text.trim();
    let unfenced = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .and_then(|s| s.strip_suffix("```"))
        .unwrap_or(trimmed)
        .trim();
    if let Some(a) = serde_json::from_str(unfenced).ok().and_then(action_from_value) {
        return Some(a);
    }
    trimmed
        .lines()
        .map(str::trim)
        .filter(|l| l.starts_with('{'))
        .find_map(|l| serde_json::from_str(l).ok().and_then(action_from_value))
}

/// What an agent needs to run tasks for one session.
#[derive(Clone)]
pub struct AgentRuntime {
    pub gateway: Arc<Gateway>,
    pub tools: Arc<dyn ToolInvoker>,
    /// Root for file I/O performed on the agent's behalf.
    pub workspace_root: PathBuf,
    pub max_steps: usize,
}

impl AgentRuntime {
    pub fn new(gateway: Arc<Gateway>, tools: Arc<dyn ToolInvoker>, workspace_root: impl Into<PathBuf>) -> Self {
        Self {
            gateway,
            tools,
            workspace_root: workspace_root.into(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

fn type_name(kind: &ParamType) -> String {
    match kind {
        ParamType::Text => "text".into(),
        ParamType::Integer => "integer".into(),
        ParamType::Boolean => "boolean".into(),
        ParamType::Choice(values) => format!("one of {}", values.join("|")),
    }
}

fn system_prompt(agent: &AgentProfile, tools: &dyn ToolInvoker) -> String {
    let mut s = agent.role_prompt.trim_end().to_string();
    s.push_str("\n\n");
    if agent.tool_bindings.is_empty() {
        s.push_str("You have no tools.\n");
    } else {
        s.push_str("Tools you may call:\n");
        for name in &agent.tool_bindings {
            let Some(d) = tools.descriptor(name) else { continue };
            let params: Vec<String> = d
                .input_schema
                .iter()
                .map(|p| {
                    format!(
                        "{} ({}, {})",
                        p.name,
                        type_name(&p.kind),
                        if p.required { "required" } else { "optional" }
                    )
                })
                .collect();
            s.push_str(&format!("- {}: {} Arguments: {}\n", d.name, d.description, params.join(", ")));
        }
    }
    s.push('\n');
    s.push_str(PROTOCOL);
    s
}

fn task_prompt(task: &TaskSpec, context: &ConversationHistory) -> String {
    let inputs = serde_json::to_string(&task.inputs).expect("inputs serialize");
    let mut s = format!(
        "Task {} ({}): {}\nInputs: {inputs}",
        task.task_id, task.task_type, task.description
    );
    let excerpt = context.excerpt(HISTORY_EXCERPT);
    if !excerpt.is_empty() {
        s.push_str("\n\nConversation so far:\n");
        s.push_str(&excerpt);
    }
    s
}

pub fn run_agent_task(
    agent: &AgentProfile,
    task: &TaskSpec,
    context: &ConversationHistory,
    runtime: &AgentRuntime,
) -> Result<TaskOutcome, AgentError> {
    if !agent.capabilities.contains(&task.task_type) {
        return Err(AgentError::CapabilityMismatch {
            agent_id: agent.agent_id.clone(),
            task_type: task.task_type,
        });
    }
    if let Some(t) = agent
        .tool_bindings
        .iter()
        .find(|t| !runtime.tools.is_registered(t))
    {
        return Err(AgentError::UnregisteredTool {
            agent_id: agent.agent_id.clone(),
            tool: t.clone(),
        });
    }

    let ctx = ToolContext {
        workspace_root: runtime.workspace_root.clone(),
        caller_role: agent.role_name.clone(),
    };
    let mut transcript = vec![
        ChatMessage::system(system_prompt(agent, runtime.tools.as_ref())),
        ChatMessage::user(task_prompt(task, context)),
    ];
    let mut artifacts: BTreeMap<String, Value> = BTreeMap::new();
    let mut repaired = false;

    for _step in 0..runtime.max_steps {
        let reply = runtime.gateway.complete_as(&agent.role_name, &transcript)?.text;
        let action = parse_action(&reply);
        if !reply.trim().is_empty() {
            transcript.push(ChatMessage::assistant(reply.clone()).authored_by(&agent.agent_id));
        }
        let outcome = |status, artifacts, transcript| TaskOutcome {
            task_id: task.task_id.clone(),
            status,
            artifacts,
            transcript,
        };
        match action {
            Some(Action::Final(artifact)) => {
                artifacts.insert("result".into(), artifact);
                return Ok(outcome(OutcomeStatus::Done, artifacts, transcript));
            }
            Some(Action::AskUser(question)) => {
                artifacts.insert("question".into(), Value::String(question));
                return Ok(outcome(OutcomeStatus::NeedsUserInput, artifacts, transcript));
            }
            Some(Action::Tool { name, arguments }) => {
                if !agent.tool_bindings.contains(&name) {
                    return Err(AgentError::ToolFailure {
                        message: format!("tool is not bound to agent `{}`", agent.agent_id),
                        tool: name,
                    });
                }
                let output = runtime
                    .tools
                    .invoke(&name, &arguments, &ctx)
                    .map_err(|e| AgentError::ToolFailure {
                        tool: name.clone(),
                        message: e.to_string(),
                    })?;
                let observation = output.to_observation();
                artifacts.insert(
                    format!("tool:{name}"),
                    serde_json::to_value(&output).expect("tool output serializes"),
                );
                transcript.push(ChatMessage::tool(format!("TOOL RESULT {name}: {observation}")));
            }
            None if !repaired => {
                repaired = true;
                transcript.push(ChatMessage::user(REPAIR));
            }
            None => {
                artifacts.insert(
                    "error".into(),
                    Value::String("no valid action after one repair prompt".into()),
                );
                return Ok(outcome(OutcomeStatus::Failed, artifacts, transcript));
            }
        }
    }
    Err(AgentError::StepCapExceeded {
        agent_id: agent.agent_id.clone(),
        max_steps: runtime.max_steps,
    })
}

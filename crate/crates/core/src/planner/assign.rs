//! Routing a task to the most suitable agent.
//!
//! Score: +10 when the task type is among the agent's capabilities, +2 for
//! each tool the task type needs that the agent binds, -1 per task already
//! running on the agent. Only capable agents are candidates; ties go to the
//! lexicographically smallest agent id.

use super::{PlanState, PlannerError, TaskSpec, TaskType};
use crate::agents::AgentProfile;
use crate::tools;

/// Tool each task type relies on, if any.
pub fn required_tool(task_type: TaskType) -> Option<&'static str> {
    match task_type {
        TaskType::KnowledgeRetrieval | TaskType::MaterialGeneration => Some(tools::WEB_CRAWLER),
        TaskType::TutoringQa => Some(tools::DEEP_RESEARCH),
        TaskType::CodingExercise | TaskType::DebuggingReview => Some(tools::CODE_INTERPRETER),
        TaskType::ReportGeneration => Some(tools::FILE_IO),
    }
}

pub fn suitability(task: &TaskSpec, agent: &AgentProfile, plan: &PlanState) -> i64 {
    let mut score = 0i64;
    if agent.capabilities.contains(&task.task_type) {
        score += 10;
    }
    if let Some(tool) = required_tool(task.task_type) {
        if agent.tool_bindings.contains(tool) {
            score += 2;
        }
    }
    score - plan.running_on(&agent.agent_id) as i64
}

pub fn assign(
    task: &TaskSpec,
    agents: &[AgentProfile],
    plan: &PlanState,
) -> Result<String, PlannerError> {
    agents
        .iter()
        .filter(|a| a.capabilities.contains(&task.task_type))
        .map(|a| (suitability(task, a, plan), a.agent_id.as_str()))
        // Highest score first, then smallest id.
        .min_by(|(sa, ia), (sb, ib)| sb.cmp(sa).then(ia.cmp(ib)))
        .map(|(_, id)| id.to_string())
        .ok_or(PlannerError::NoCapableAgent(task.task_type))
}

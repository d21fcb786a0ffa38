//! Turning a student request into tasks.

use serde::Deserialize;

use super::{PlanState, PlannerError, TaskSpec, TaskType};
use crate::conversation::ConversationHistory;
use crate::llm::{ChatMessage, Gateway};
use crate::profile::StudentProfile;
use crate::prompts;

/// The chain emitted for a full learning request: `(task_id, type, depends_on)`.
pub const CANONICAL_CHAIN: [(&str, TaskType, Option<&str>); 4] = [
    ("t1", TaskType::KnowledgeRetrieval, None),
    ("t2", TaskType::MaterialGeneration, Some("t1")),
    ("t3", TaskType::CodingExercise, Some("t2")),
    ("t4", TaskType::ReportGeneration, Some("t3")),
];

const QUESTION_WORDS: &[&str] = &[
    "what", "why", "how", "when", "where", "which", "who", "is", "are", "can", "could", "does",
    "do", "should", "would", "will",
];

const LEARNING_PREFIXES: &[&str] = &[
    "teach me about ",
    "teach me ",
    "i want to learn about ",
    "i want to learn ",
    "help me learn about ",
    "help me learn ",
    "help me understand ",
    "learn about ",
    "learn ",
];

const HISTORY_EXCERPT: usize = 6;

pub enum DecomposeMode<'a> {
    RuleBased,
    /// The Planner agent proposes a JSON plan through the gateway.
    LlmAssisted(&'a Gateway),
}

/// A single question rather than a learning request.
pub fn is_question(request: &str) -> bool {
    let r = request.trim();
    if r.ends_with('?') {
        return true;
    }
    let first = r
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    QUESTION_WORDS.contains(&first.as_str())
}

fn topic_of(request: &str) -> String {
    let r = request.trim();
    let lower = r.to_lowercase();
    let rest = LEARNING_PREFIXES
        .iter()
        .find(|p| lower.starts_with(*p))
        .map(|p| &r[p.len()..])
        .unwrap_or(r);
    rest.trim_end_matches(['.', '!', '?']).trim().to_string()
}

pub fn canonical_chain(topic: &str) -> Vec<TaskSpec> {
    CANONICAL_CHAIN
        .iter()
        .map(|(id, ty, dep)| {
            let description = match ty {
                TaskType::KnowledgeRetrieval => format!("Find sources about {topic}"),
                TaskType::MaterialGeneration => format!("Write learning material on {topic}"),
                TaskType::CodingExercise => format!("Guide a coding exercise on {topic}"),
                _ => "Summarize the learning session".to_string(),
            };
            let spec = TaskSpec::new(*id, *ty, description).with_input("topic", topic);
            match dep {
                Some(d) => spec.after([*d]),
                None => spec,
            }
        })
        .collect()
}

pub fn decompose(
    request: &str,
    profile: &StudentProfile,
    history: &ConversationHistory,
    mode: DecomposeMode<'_>,
) -> Result<Vec<TaskSpec>, PlannerError> {
    if request.trim().is_empty() {
        return Err(PlannerError::EmptyRequest);
    }
    match mode {
        DecomposeMode::RuleBased => Ok(rule_based(request, profile)),
        DecomposeMode::LlmAssisted(gateway) => llm_assisted(gateway, request, profile, history),
    }
}

fn rule_based(request: &str, profile: &StudentProfile) -> Vec<TaskSpec> {
    if is_question(request) {
        return vec![TaskSpec::new("q1", TaskType::TutoringQa, request.trim())
            .with_input("question", request.trim())];
    }
    canonical_chain(&topic_of(request))
        .into_iter()
        .map(|t| t.with_input("level", profile.self_reported_level.as_str()))
        .collect()
}

#[derive(Deserialize)]
struct PlanReply {
    tasks: Vec<TaskSpec>,
}

/// Parses a plan reply: the outermost JSON object in `text` with a non-empty
/// `tasks` list forming a valid DAG.
pub fn parse_plan(text: &str) -> Result<Vec<TaskSpec>, String> {
    let start = text.find('{').ok_or("no JSON object in reply")?;
    let end = text.rfind('}').ok_or("no JSON object in reply")?;
    if end < start {
        return Err("no JSON object in reply".into());
    }
    let reply: PlanReply =
        serde_json::from_str(&text[start..=end]).map_err(|e| format!("invalid plan JSON: {e}"))?;
    if reply.tasks.is_empty() {
        return Err("plan has no tasks".into());
    }
    PlanState::new(reply.tasks.clone()).map_err(|e| e.to_string())?;
    Ok(reply.tasks)
}

fn llm_assisted(
    gateway: &Gateway,
    request: &str,
    profile: &StudentProfile,
    history: &ConversationHistory,
) -> Result<Vec<TaskSpec>, PlannerError> {
    let mut user = format!("Student request: {}\n\n{}", request.trim(), profile.describe());
    let excerpt = history.excerpt(HISTORY_EXCERPT);
    if !excerpt.is_empty() {
        user.push_str(&format!("\n\nRecent conversation:\n{excerpt}"));
    }
    let mut messages = vec![ChatMessage::system(prompts::PLANNER), ChatMessage::user(user)];
    let mut last_error = String::new();
    for _attempt in 0..2 {
        let reply = gateway.complete_as("planner", &messages)?.text;
        match parse_plan(&reply) {
            Ok(tasks) => return Ok(tasks),
            Err(e) => {
                messages.push(ChatMessage::assistant(if reply.trim().is_empty() {
                    "(empty reply)".to_string()
                } else {
                    reply
                }));
                messages.push(ChatMessage::user(format!(
                    "That plan could not be used: {e}. Reply with the JSON plan object only."
                )));
                last_error = e;
            }
        }
    }
    Err(PlannerError::DecompositionFailure(last_error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockProvider, ScriptedFixture};
    use crate::profile::Level;

    fn profile() -> StudentProfile {
        StudentProfile::new("first-year", "learn recursion", Level::Low)
    }

    #[test]
    fn learning_request_gives_canonical_chain() {
        let tasks = decompose(
            "teach me recursion",
            &profile(),
            &ConversationHistory::new(),
            DecomposeMode::RuleBased,
        )
        .unwrap();
        let shape: Vec<(String, TaskType, Vec<String>)> = tasks
            .iter()
            .map(|t| (t.task_id.clone(), t.task_type, t.depends_on.iter().cloned().collect()))
            .collect();
        let table: Vec<(String, TaskType, Vec<String>)> = CANONICAL_CHAIN
            .iter()
            .map(|(id, ty, dep)| (id.to_string(), *ty, dep.iter().map(|d| d.to_string()).collect()))
            .collect();
        assert_eq!(shape, table);
        assert_eq!(tasks[0].inputs["topic"], "recursion");
    }

    #[test]
    fn question_gives_single_qa_task() {
        let tasks = decompose(
            "what does this error mean?",
            &profile(),
            &ConversationHistory::new(),
            DecomposeMode::RuleBased,
        )
        .unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].task_type, TaskType::TutoringQa);
        assert!(tasks[0].depends_on.is_empty());
    }

    #[test]
    fn empty_request_rejected() {
        let err = decompose("", &profile(), &ConversationHistory::new(), DecomposeMode::RuleBased)
            .unwrap_err();
        assert_eq!(err, PlannerError::EmptyRequest);
    }

    #[test]
    fn llm_plan_parsed_after_one_repair() {
        let good = r#"{"tasks": [{"task_id": "a", "task_type": "knowledge_retrieval", "description": "find"}, {"task_id": "b", "task_type": "material_generation", "description": "write", "depends_on": ["a"]}]}"#;
        let gw = Gateway::mock(
            MockProvider::new().with_default(ScriptedFixture::indexed(["not a plan", good])),
            &["planner"],
        );
        let tasks = decompose(
            "teach me sorting",
            &profile(),
            &ConversationHistory::new(),
            DecomposeMode::LlmAssisted(&gw),
        )
        .unwrap();
        assert_eq!(tasks.len(), 2);
        assert!(tasks[1].depends_on.contains("a"));
    }

    #[test]
    fn llm_plan_fails_after_second_bad_reply() {
        let cyclic = r#"{"tasks": [{"task_id": "a", "task_type": "tutoring_qa", "description": "x", "depends_on": ["a"]}]}"#;
        let gw = Gateway::mock(
            MockProvider::new().with_default(ScriptedFixture::indexed(["garbage", cyclic])),
            &["planner"],
        );
        let err = decompose(
            "teach me sorting",
            &profile(),
            &ConversationHistory::new(),
            DecomposeMode::LlmAssisted(&gw),
        )
        .unwrap_err();
        assert!(matches!(err, PlannerError::DecompositionFailure(_)));
    }

    #[test]
    fn unknown_task_type_is_unparseable() {
        assert!(parse_plan(r#"{"tasks": [{"task_id": "a", "task_type": "dance", "description": "x"}]}"#).is_err());
    }
}

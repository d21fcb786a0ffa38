use std::sync::{Arc, Mutex};

use codeedu_core::agents::{
    default_profiles, run_agent_task, AgentError, AgentPool, AgentProfile, AgentRuntime,
    OutcomeStatus,
};
use codeedu_core::conversation::ConversationHistory;
use codeedu_core::llm::{
    ChatMessage, Gateway, MockProvider, ModelBinding, RetryPolicy, ScriptedFixture,
};
use codeedu_core::planner::{TaskSpec, TaskType};
use codeedu_core::prompts::PromptSet;
use codeedu_core::tools::{
    builtin_descriptors, Crawler, PythonSandbox, SandboxPolicy, ToolContext, ToolDescriptor,
    ToolError, ToolInvoker, ToolOutput, ToolPool,
};
use proptest::prelude::*;
use serde_json::{json, Map, Value};

/// Tool registry stand-in that records every invocation.
#[derive(Default)]
struct Recorder {
    calls: Mutex<Vec<String>>,
}

impl ToolInvoker for Recorder {
    fn descriptor(&self, name: &str) -> Option<ToolDescriptor> {
        builtin_descriptors().into_iter().find(|d| d.name == name)
    }

    fn invoke(&self, name: &str, args: &Map<String, Value>, _: &ToolContext) -> Result<ToolOutput, ToolError> {
        let d = self
            .descriptor(name)
            .ok_or_else(|| ToolError::UnknownTool(name.into()))?;
        d.check_arguments(args)?;
        self.calls.lock().unwrap().push(name.to_string());
        Ok(ToolOutput::Custom {
            value: json!({"echo": name}),
        })
    }
}

fn profile(id: &str) -> AgentProfile {
    default_profiles(&PromptSet::default())
        .into_iter()
        .find(|p| p.agent_id == id)
        .unwrap()
}

fn runtime(gateway: Gateway, tools: Arc<dyn ToolInvoker>, dir: &std::path::Path) -> AgentRuntime {
    AgentRuntime::new(Arc::new(gateway), tools, dir)
}

fn mock(role: &str, replies: &[&str]) -> Gateway {
    let provider = MockProvider::new().with_fixture(role, ScriptedFixture::indexed(replies.iter().copied()));
    Gateway::mock(provider, &[role])
}

/// Gateway over a shared mock so tests can inspect the requests it saw.
fn shared_mock(role: &str, provider: MockProvider) -> (Gateway, Arc<MockProvider>) {
    let provider = Arc::new(provider);
    let gw = Gateway::with_retry(RetryPolicy::no_wait());
    gw.register_provider("mock", provider.clone()).unwrap();
    gw.bind(ModelBinding::new(role, "mock", "scripted")).unwrap();
    (gw, provider)
}

#[test]
fn tutor_answers_with_fixture_text() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock("tutor", &[r#"{"final": "A base case is the input where recursion stops."}"#]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("q1", TaskType::TutoringQa, "what is a base case?");
    let out = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap();
    assert_eq!(out.status, OutcomeStatus::Done);
    assert_eq!(
        out.result_text().unwrap(),
        "A base case is the input where recursion stops."
    );
}

#[test]
fn programmer_runs_source_in_sandbox() {
    let dir = tempfile::tempdir().unwrap();
    let (gw, provider) = shared_mock(
        "programmer",
        MockProvider::new().with_fixture(
            "programmer",
            ScriptedFixture::indexed([
                r#"{"tool": "code_interpreter", "arguments": {"source": "print(2*3)"}}"#,
                r#"{"final": "The program printed the product."}"#,
            ]),
        ),
    );
    let gw = Arc::new(gw);
    let pool = ToolPool::new(
        gw.clone(),
        Arc::new(PythonSandbox::new(dir.path())),
        Crawler::default(),
        SandboxPolicy::default(),
    );
    let rt = AgentRuntime::new(gw.clone(), Arc::new(pool), dir.path());
    let task = TaskSpec::new("c1", TaskType::CodingExercise, "run the student's code")
        .with_input("source", "print(2*3)");
    let out = run_agent_task(&profile("programmer"), &task, &ConversationHistory::new(), &rt).unwrap();
    assert_eq!(out.status, OutcomeStatus::Done);
    let exec = out.tool_output("code_interpreter").unwrap();
    // Oracle: 2 * 3 evaluated on the host.
    assert_eq!(exec["stdout"].as_str().unwrap().trim(), (2 * 3).to_string());
    // The tool result was fed back to the model before its final answer.
    let last_request = provider.requests().pop().unwrap();
    assert!(last_request
        .messages
        .iter()
        .any(|m| m.content.starts_with("TOOL RESULT code_interpreter")));
}

#[test]
fn capability_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock("researcher", &[]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("c1", TaskType::CodingExercise, "code");
    let err = run_agent_task(&profile("researcher"), &task, &ConversationHistory::new(), &rt).unwrap_err();
    assert!(matches!(err, AgentError::CapabilityMismatch { .. }));
}

#[test]
fn unbound_tool_is_never_invoked() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock(
        "tutor",
        &[r#"{"tool": "code_interpreter", "arguments": {"source": "print(1)"}}"#],
    );
    let recorder = Arc::new(Recorder::default());
    let rt = runtime(gw, recorder.clone(), dir.path());
    let task = TaskSpec::new("q1", TaskType::TutoringQa, "q");
    let err = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap_err();
    match err {
        AgentError::ToolFailure { tool, .. } => assert_eq!(tool, "code_interpreter"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(recorder.calls.lock().unwrap().is_empty());
}

#[test]
fn tool_error_carries_tool_name() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock("tutor", &[r#"{"tool": "deep_research", "arguments": {}}"#]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("q1", TaskType::TutoringQa, "q");
    let err = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap_err();
    assert!(matches!(err, AgentError::ToolFailure { ref tool, .. } if tool == "deep_research"));
}

#[test]
fn step_cap_bounds_completions() {
    let dir = tempfile::tempdir().unwrap();
    let (gw, provider) = shared_mock(
        "tutor",
        MockProvider::new().with_fixture(
            "tutor",
            ScriptedFixture::substring().always(
                Vec::<String>::new(),
                r#"{"tool": "deep_research", "arguments": {"question": "again?"}}"#,
            ),
        ),
    );
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("q1", TaskType::TutoringQa, "q");
    let err = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap_err();
    assert!(matches!(err, AgentError::StepCapExceeded { max_steps: 8, .. }));
    assert_eq!(provider.requests().len(), 8);
}

#[test]
fn malformed_action_gets_one_repair() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock("tutor", &["just prose", r#"{"final": "ok"}"#]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("q1", TaskType::TutoringQa, "q");
    let out = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap();
    assert_eq!(out.status, OutcomeStatus::Done);

    let gw = mock("tutor", &["prose", "more prose"]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let out = run_agent_task(&profile("tutor"), &task, &ConversationHistory::new(), &rt).unwrap();
    assert_eq!(out.status, OutcomeStatus::Failed);
    assert!(out.artifacts.contains_key("error"));
}

#[test]
fn ask_user_needs_input() {
    let dir = tempfile::tempdir().unwrap();
    let gw = mock("researcher", &[r#"{"ask_user": "Which language do you use?"}"#]);
    let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
    let task = TaskSpec::new("t1", TaskType::KnowledgeRetrieval, "find sources");
    let out = run_agent_task(&profile("researcher"), &task, &ConversationHistory::new(), &rt).unwrap();
    assert_eq!(out.status, OutcomeStatus::NeedsUserInput);
    assert_eq!(out.artifacts["question"], "Which language do you use?");
}

#[test]
fn mock_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let script = [
        r#"{"tool": "web_crawler", "arguments": {"query": "recursion basics"}}"#,
        r#"{"final": {"topic": "recursion", "sections": []}}"#,
    ];
    let mut history = ConversationHistory::new();
    history.push_message(ChatMessage::user("teach me recursion"));
    let task = TaskSpec::new("t1", TaskType::KnowledgeRetrieval, "find").with_input("topic", "recursion");
    let run = || {
        let gw = mock("researcher", &script);
        let rt = runtime(gw, Arc::new(Recorder::default()), dir.path());
        run_agent_task(&profile("researcher"), &task, &history, &rt).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn default_pool_lists_five_agents() {
    let pool = AgentPool::with_defaults(&PromptSet::default(), &Recorder::default()).unwrap();
    assert_eq!(pool.list().len(), 5);
}

const TOOL_NAMES: [&str; 5] = ["web_crawler", "file_io", "code_interpreter", "deep_research", "nonexistent"];

fn tool_call(name: &str) -> String {
    let args = match name {
        "web_crawler" => json!({"query": "q"}),
        "file_io" => json!({"mode": "read", "path": "x"}),
        "code_interpreter" => json!({"source": "print(1)"}),
        "deep_research" => json!({"question": "why?"}),
        _ => json!({}),
    };
    json!({"tool": name, "arguments": args}).to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn only_bound_tools_are_invoked(
        agent_idx in 0usize..4,
        calls in proptest::collection::vec(0usize..5, 0..10),
    ) {
        let (agent_id, task_type) = [
            ("researcher", TaskType::KnowledgeRetrieval),
            ("report_analyst", TaskType::ReportGeneration),
            ("programmer", TaskType::DebuggingReview),
            ("tutor", TaskType::TutoringQa),
        ][agent_idx];
        let agent = profile(agent_id);
        let mut replies: Vec<String> = calls.iter().map(|i| tool_call(TOOL_NAMES[*i])).collect();
        replies.push(r#"{"final": "done"}"#.to_string());
        let provider = MockProvider::new().with_fixture(agent_id, ScriptedFixture::indexed(replies));
        let gw = Gateway::mock(provider, &[agent_id]);
        let recorder = Arc::new(Recorder::default());
        let dir = std::env::temp_dir();
        let rt = runtime(gw, recorder.clone(), &dir);
        let task = TaskSpec::new("t", task_type, "d");
        let _ = run_agent_task(&agent, &task, &ConversationHistory::new(), &rt);
        for name in recorder.calls.lock().unwrap().iter() {
            prop_assert!(agent.tool_bindings.contains(name), "{} invoked {}", agent_id, name);
        }
    }
}

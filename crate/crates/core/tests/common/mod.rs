//! Shared scaffolding for session and acceptance tests.

#![allow(dead_code)]

pub mod metric_oracle;
pub mod planner_gen;
pub mod session_ops;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use codeedu_core::dataset::{toy_problems, Problem};
use codeedu_core::llm::{Gateway, MockProvider, ModelBinding, RetryPolicy, ScriptedFixture};
use codeedu_core::prompts::PromptSet;
use codeedu_core::session::{Engine, EngineConfig};
use codeedu_core::tools::{
    write_corpus_entry, CodeExecutor, CorpusDocument, Crawler, PythonSandbox, ExecVerdict, ExecutionResult,
    SandboxError, SandboxPolicy,
};

pub const URL_A: &str = "https://docs.example.org/recursion";
pub const URL_B: &str = "https://notes.example.org/base-cases";

pub const STOP_ROLE: &str = "stop_check";

/// Answers `# pass <problem_id>` with the expected output of the matching
/// case and anything else with a wrong answer, without spawning processes.
pub struct StubExecutor {
    expected: BTreeMap<(String, String), String>,
}

impl StubExecutor {
    pub fn new(problems: &[Problem]) -> Self {
        let mut expected = BTreeMap::new();
        for p in problems {
            for c in &p.test_cases {
                expected.insert((p.problem_id.clone(), c.input.clone()), c.expected_output.clone());
            }
        }
        Self { expected }
    }
}

impl CodeExecutor for StubExecutor {
    fn execute(&self, source: &str, stdin: &str, _: &SandboxPolicy) -> Result<ExecutionResult, SandboxError> {
        let stdout = source
            .trim()
            .strip_prefix("# pass ")
            .and_then(|pid| self.expected.get(&(pid.trim().to_string(), stdin.to_string())))
            .cloned()
            .unwrap_or_else(|| "wrong\n".into());
        Ok(ExecutionResult {
            stdout,
            stderr: String::new(),
            exit_code: Some(0),
            signal: None,
            verdict: ExecVerdict::Completed,
            elapsed_ms: 0,
        })
    }
}

pub fn passing_stub(problem_id: &str) -> String {
    format!("# pass {problem_id}")
}

pub fn material_reply() -> String {
    let material = serde_json::json!({
        "final": {
            "topic": "recursion",
            "sections": [
                {"heading": "Base cases", "body": "Every recursion needs a stopping input.", "source_refs": [URL_B]},
                {"heading": "Recursive cases", "body": "Reduce the input and call again.", "source_refs": [URL_A, "https://invented.example/x"]}
            ]
        }
    });
    material.to_string()
}

/// Fixtures for every agent role plus the stop check. `stop_at` scripts a
/// STOP reply at that turn.
pub fn session_provider(stop_at: Option<usize>) -> MockProvider {
    let researcher = ScriptedFixture::substring()
        .always(
            ["(knowledge_retrieval)"],
            r#"{"tool": "web_crawler", "arguments": {"query": "recursion"}}"#,
        )
        .always(
            ["(knowledge_retrieval)", "TOOL RESULT web_crawler"],
            r#"{"final": "Collected two sources on recursion."}"#,
        )
        .always(["(material_generation)"], material_reply());
    let tutor = ScriptedFixture::substring()
        .always(Vec::<String>::new(), r#"{"final": "Think about the smallest input first."}"#)
        .always(
            ["(tutoring_qa): What is a base case?"],
            r#"{"final": "A base case is the input where recursion stops."}"#,
        );
    let programmer = ScriptedFixture::substring()
        .always(["(debugging_review)"], r#"{"final": "Check the base case and the loop bounds."}"#);
    let analyst = ScriptedFixture::substring()
        .always(["(report_generation)"], r#"{"final": "Next, practice memoization on p03."}"#);
    let planner = ScriptedFixture::substring().always(Vec::<String>::new(), r#"{"final": []}"#);
    let mut stop = ScriptedFixture::substring().always(Vec::<String>::new(), "NO");
    if let Some(t) = stop_at {
        stop = stop.always([format!("[turn {t}/")], "STOP");
    }
    MockProvider::new()
        .with_fixture("researcher", researcher)
        .with_fixture("tutor", tutor)
        .with_fixture("programmer", programmer)
        .with_fixture("report_analyst", analyst)
        .with_fixture("planner", planner)
        .with_fixture(STOP_ROLE, stop)
}

pub fn shared_gateway(provider: MockProvider) -> (Arc<Gateway>, Arc<MockProvider>) {
    let provider = Arc::new(provider);
    let gw = Gateway::with_retry(RetryPolicy::no_wait());
    gw.register_provider("mock", provider.clone()).unwrap();
    for role in ["planner", "researcher", "report_analyst", "programmer", "tutor", STOP_ROLE] {
        gw.bind(ModelBinding::new(role, "mock", "scripted")).unwrap();
    }
    (Arc::new(gw), provider)
}

pub fn write_corpus(dir: &Path) {
    write_corpus_entry(
        dir,
        "recursion",
        vec![
            CorpusDocument {
                url: URL_A.into(),
                title: "Recursion".into(),
                snippet: "Functions that call themselves.".into(),
                text: "Recursion solves a problem by solving smaller instances.".into(),
            },
            CorpusDocument {
                url: URL_B.into(),
                title: "Base cases".into(),
                snippet: "Where recursion stops.".into(),
                text: "A base case returns without recursing.".into(),
            },
        ],
    )
    .unwrap();
}

pub struct Harness {
    pub engine: Engine,
    pub provider: Arc<MockProvider>,
    pub dir: tempfile::TempDir,
}

/// `executor` defaults to a Python sandbox scratch directory inside the harness.
pub fn engine_with(
    executor: Option<Arc<dyn CodeExecutor>>,
    stop_at: Option<usize>,
    max_turns: usize,
    corpus: bool,
) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("corpus");
    if corpus {
        write_corpus(&corpus_dir);
    } else {
        std::fs::create_dir_all(&corpus_dir).unwrap();
    }
    let executor = executor.unwrap_or_else(|| Arc::new(PythonSandbox::new(dir.path().join("scratch"))));
    let (gateway, provider) = shared_gateway(session_provider(stop_at));
    let mut config = EngineConfig::new(dir.path().join("root"));
    config.max_turns = max_turns;
    config.sequential_ids = true;
    let engine = Engine::new(
        config,
        gateway,
        executor,
        Crawler::offline(corpus_dir),
        SandboxPolicy::default(),
        toy_problems(),
        &PromptSet::default(),
    )
    .unwrap();
    Harness { engine, provider, dir }
}

pub fn stub_engine(stop_at: Option<usize>, max_turns: usize) -> Harness {
    engine_with(Some(Arc::new(StubExecutor::new(&toy_problems()))), stop_at, max_turns, true)
}

pub fn python_engine() -> Harness {
    engine_with(None, None, 20, true)
}

pub fn intake(level: &str, topics: &str) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("background".to_string(), "first-year".to_string());
    m.insert("goals".to_string(), "learn recursion".to_string());
    m.insert("level".to_string(), level.to_string());
    m.insert("topics".to_string(), topics.to_string());
    m
}

/// Every path under `root`, recursively.
pub fn file_tree(root: &Path) -> BTreeSet<PathBuf> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p.clone());
            }
            out.insert(p);
        }
    }
    out
}

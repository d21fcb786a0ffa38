//! Tool pool: the web crawler, file I/O, code interpreter and deep research
//! engine behind one invocation interface.

mod crawler;
mod files;
mod judge;
mod research;
mod sandbox;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use crawler::{
    corpus_file_name, normalize_query, write_corpus_entry, CorpusDocument, CorpusFile, CrawlEntry,
    CrawlError, CrawlResult, Crawler,
};
pub use files::{confine, read as read_file, write as write_file, FileIoError};
pub use judge::{outputs_match, run_unit_tests, CaseRun, Comparison, TestCase, TestReport};
pub use research::{deep_research, research_prompt, ResearchError};
pub use sandbox::{
    CodeExecutor, ExecVerdict, ExecutionResult, PythonSandbox, SandboxError, SandboxPolicy,
};

use crate::llm::Gateway;

pub const WEB_CRAWLER: &str = "web_crawler";
pub const FILE_IO: &str = "file_io";
pub const CODE_INTERPRETER: &str = "code_interpreter";
pub const DEEP_RESEARCH: &str = "deep_research";

/// Role whose binding serves deep-research calls; falls back to the caller's.
pub const DEEP_RESEARCH_ROLE: &str = "deep_research";

const DEFAULT_CRAWL_RESULTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "values")]
pub enum ParamType {
    Text,
    Integer,
    Boolean,
    Choice(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamType,
    pub required: bool,
    pub description: String,
}

impl ParamSpec {
    fn new(name: &str, kind: ParamType, required: bool, description: &str) -> Self {
        Self {
            name: name.into(),
            kind,
            required,
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub name: String,
    pub description: String,
    pub input_schema: Vec<ParamSpec>,
}

impl ToolDescriptor {
    /// Checks required parameters, value types, and rejects unknown names.
    pub fn check_arguments(&self, args: &Map<String, Value>) -> Result<(), ToolError> {
        let mismatch = |message: String| ToolError::SchemaMismatch {
            tool: self.name.clone(),
            message,
        };
        for key in args.keys() {
            if !self.input_schema.iter().any(|p| &p.name == key) {
                return Err(mismatch(format!("unknown argument `{key}`")));
            }
        }
        for p in &self.input_schema {
            let Some(v) = args.get(&p.name).filter(|v| !v.is_null()) else {
                if p.required {
                    return Err(mismatch(format!("missing argument `{}`", p.name)));
                }
                continue;
            };
            let ok = match &p.kind {
                ParamType::Text => v.is_string(),
                ParamType::Integer => v.as_u64().is_some() || v.as_i64().is_some(),
                ParamType::Boolean => v.is_boolean(),
                ParamType::Choice(values) => v.as_str().is_some_and(|s| values.iter().any(|c| c == s)),
            };
            if !ok {
                return Err(mismatch(format!(
                    "argument `{}` should be {:?}, got {v}",
                    p.name, p.kind
                )));
            }
        }
        Ok(())
    }
}

/// Per-call context supplied by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolContext {
    /// Root that file I/O is confined to (a session workspace).
    pub workspace_root: PathBuf,
    /// Role of the calling agent; selects the model for deep research.
    pub caller_role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToolOutput {
    FileContents { content: String },
    FileWritten { path: String },
    Execution(ExecutionResult),
    Crawl(CrawlResult),
    Explanation { text: String },
    Custom { value: Value },
}

impl ToolOutput {
    /// JSON rendering fed back to the calling model.
    pub fn to_observation(&self) -> String {
        serde_json::to_string(self).expect("tool output serializes")
    }
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("tool `{tool}` arguments do not match its schema: {message}")]
    SchemaMismatch { tool: String, message: String },
    #[error("tool `{0}` is already registered")]
    DuplicateTool(String),
    #[error(transparent)]
    File(#[from] FileIoError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error(transparent)]
    Crawl(#[from] CrawlError),
    #[error(transparent)]
    Research(#[from] ResearchError),
    #[error("tool `{tool}` failed: {message}")]
    Other { tool: String, message: String },
}

pub trait Tool: Send + Sync {
    fn descriptor(&self) -> &ToolDescriptor;
    fn call(&self, args: &Map<String, Value>, ctx: &ToolContext) -> Result<ToolOutput, ToolError>;
}

/// Uniform dispatch over named tools.
pub trait ToolInvoker: Send + Sync {
    fn descriptor(&self, name: &str) -> Option<ToolDescriptor>;
    fn invoke(
        &self,
        name: &str,
        args: &Map<String, Value>,
        ctx: &ToolContext,
    ) -> Result<ToolOutput, ToolError>;

    fn is_registered(&self, name: &str) -> bool {
        self.descriptor(name).is_some()
    }
}

fn text_arg<'a>(args: &'a Map<String, Value>, name: &str) -> Option<&'a str> {
    args.get(name).and_then(Value::as_str)
}

struct WebCrawlerTool {
    descriptor: ToolDescriptor,
    crawler: Crawler,
}

impl Tool for WebCrawlerTool {
    fn descriptor(&self) -> &ToolDescriptor {
        &self.descriptor
    }

    fn call(&self, args: &Map<String, Value>, _ctx: &ToolContext) -> Result<ToolOutput, ToolError> {
        let query = text_arg(args, "query").unwrap_or_default();
        let max = args
            .get("max_results")
            .and_then(Value::as_u64)
            .map(|n| n as usize)
            .unwrap_or(DEFAULT_CRAWL_RESULTS);
        Ok(ToolOutput::Crawl(self.crawler.crawl(query, max)?))
    }
}

struct FileIoTool {
    descriptor: ToolDescriptor,
}

impl Tool for FileIoTool {
    fn descriptor(&self) -> &ToolDescriptor {
        &self.descriptor
    }

    fn call(&self, args: &Map<String, Value>, ctx: &ToolContext) -> Result<ToolOutput, ToolError> {
        let path = text_arg(args, "path").unwrap_or_default();
        match text_arg(args, "mode") {
            Some("write") => {
                let content = text_arg(args, "content").ok_or(FileIoError::MissingContent)?;
                write_file(&ctx.workspace_root, path, content)?;
                Ok(ToolOutput::FileWritten {
                    path: path.to_string(),
                })
            }
            _ => Ok(ToolOutput::FileContents {
                content: read_file(&ctx.workspace_root, path)?,
            }),
        }
    }
}

struct CodeInterpreterTool {
    descriptor: ToolDescriptor,
    executor: Arc<dyn CodeExecutor>,
    policy: SandboxPolicy,
}

impl Tool for CodeInterpreterTool {
    fn descriptor(&self) -> &ToolDescriptor {
        &self.descriptor
    }

    fn call(&self, args: &Map<String, Value>, _ctx: &ToolContext) -> Result<ToolOutput, ToolError> {
        let source = text_arg(args, "source").unwrap_or_default();
        let stdin = text_arg(args, "stdin").unwrap_or_default();
        Ok(ToolOutput::Execution(
            self.executor.execute(source, stdin, &self.policy)?,
        ))
    }
}

struct DeepResearchTool {
    descriptor: ToolDescriptor,
    gateway: Arc<Gateway>,
}

impl Tool for DeepResearchTool {
    fn descriptor(&self) -> &ToolDescriptor {
        &self.descriptor
    }

    fn call(&self, args: &Map<String, Value>, ctx: &ToolContext) -> Result<ToolOutput, ToolError> {
        let binding = self
            .gateway
            .binding_or(DEEP_RESEARCH_ROLE, &ctx.caller_role)
            .map_err(ResearchError::from)?;
        let text = deep_research(
            &self.gateway,
            &binding,
            text_arg(args, "context").unwrap_or_default(),
            text_arg(args, "question").unwrap_or_default(),
        )?;
        Ok(ToolOutput::Explanation { text })
    }
}

pub fn builtin_descriptors() -> Vec<ToolDescriptor> {
    vec![
        ToolDescriptor {
            name: WEB_CRAWLER.into(),
            description: "Search the web and return the most relevant results.".into(),
            input_schema: vec![
                ParamSpec::new("query", ParamType::Text, true, "search query"),
                ParamSpec::new("max_results", ParamType::Integer, false, "result limit (default 5)"),
            ],
        },
        ToolDescriptor {
            name: FILE_IO.into(),
            description: "Read a file from the session workspace or write content to one.".into(),
            input_schema: vec![
                ParamSpec::new(
                    "mode",
                    ParamType::Choice(vec!["read".into(), "write".into()]),
                    true,
                    "read or write",
                ),
                ParamSpec::new("path", ParamType::Text, true, "path relative to the workspace"),
                ParamSpec::new("content", ParamType::Text, false, "text to write (write mode)"),
            ],
        },
        ToolDescriptor {
            name: CODE_INTERPRETER.into(),
            description: "Execute Python 3 code in a secure, isolated sandbox.".into(),
            input_schema: vec![
                ParamSpec::new("source", ParamType::Text, true, "Python 3 source"),
                ParamSpec::new("stdin", ParamType::Text, false, "standard input"),
            ],
        },
        ToolDescriptor {
            name: DEEP_RESEARCH.into(),
            description: "Generate a personalized explanation from contextual information.".into(),
            input_schema: vec![
                ParamSpec::new("context", ParamType::Text, false, "background material"),
                ParamSpec::new("question", ParamType::Text, true, "what to explain"),
            ],
        },
    ]
}

/// Registry of tools. Immutable once shared.
pub struct ToolPool {
    tools: BTreeMap<String, Arc<dyn Tool>>,
    executor: Arc<dyn CodeExecutor>,
    policy: SandboxPolicy,
}

impl std::fmt::Debug for ToolPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToolPool")
            .field("tools", &self.tools.keys().collect::<Vec<_>>())
            .field("policy", &self.policy)
            .finish()
    }
}

impl ToolPool {
    /// The four built-in tools.
    pub fn new(
        gateway: Arc<Gateway>,
        executor: Arc<dyn CodeExecutor>,
        crawler: Crawler,
        policy: SandboxPolicy,
    ) -> Self {
        let mut descriptors = builtin_descriptors().into_iter();
        let mut next = || descriptors.next().expect("four built-in descriptors");
        let mut tools: BTreeMap<String, Arc<dyn Tool>> = BTreeMap::new();
        let crawler_tool = WebCrawlerTool {
            descriptor: next(),
            crawler,
        };
        let file_tool = FileIoTool { descriptor: next() };
        let code_tool = CodeInterpreterTool {
            descriptor: next(),
            executor: executor.clone(),
            policy: policy.clone(),
        };
        let research_tool = DeepResearchTool {
            descriptor: next(),
            gateway,
        };
        tools.insert(WEB_CRAWLER.into(), Arc::new(crawler_tool));
        tools.insert(FILE_IO.into(), Arc::new(file_tool));
        tools.insert(CODE_INTERPRETER.into(), Arc::new(code_tool));
        tools.insert(DEEP_RESEARCH.into(), Arc::new(research_tool));
        Self {
            tools,
            executor,
            policy,
        }
    }

    pub fn register(&mut self, tool: Arc<dyn Tool>) -> Result<(), ToolError> {
        let name = tool.descriptor().name.clone();
        if self.tools.contains_key(&name) {
            return Err(ToolError::DuplicateTool(name));
        }
        self.tools.insert(name, tool);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.tools.keys().cloned().collect()
    }

    pub fn descriptors(&self) -> Vec<ToolDescriptor> {
        self.tools.values().map(|t| t.descriptor().clone()).collect()
    }

    pub fn executor(&self) -> &Arc<dyn CodeExecutor> {
        &self.executor
    }

    pub fn policy(&self) -> &SandboxPolicy {
        &self.policy
    }

    pub fn execute_code(&self, source: &str, stdin: &str) -> Result<ExecutionResult, SandboxError> {
        self.executor.execute(source, stdin, &self.policy)
    }

    pub fn run_unit_tests(&self, source: &str, cases: &[TestCase]) -> Result<TestReport, SandboxError> {
        run_unit_tests(self.executor.as_ref(), source, cases, &self.policy)
    }
}

impl ToolInvoker for ToolPool {
    fn descriptor(&self, name: &str) -> Option<ToolDescriptor> {
        self.tools.get(name).map(|t| t.descriptor().clone())
    }

    fn invoke(
        &self,
        name: &str,
        args: &Map<String, Value>,
        ctx: &ToolContext,
    ) -> Result<ToolOutput, ToolError> {
        let tool = self
            .tools
            .get(name)
            .ok_or_else(|| ToolError::UnknownTool(name.to_string()))?;
        tool.descriptor().check_arguments(args)?;
        tool.call(args, ctx)
    }
}

//! Server configuration from the environment.
//!
//! | variable | default |
//! |---|---|
//! | `CODEEDU_BIND_ADDR` | `127.0.0.1:8080` |
//! | `CODEEDU_WORKSPACE_ROOT` | `./codeedu-workspace` |
//! | `CODEEDU_PROVIDER_CONFIG` | unset: scripted mock provider with bundled fixtures |
//! | `CODEEDU_PROBLEMS` | unset: the bundled toy problem set |
//! | `CODEEDU_CRAWLER_ENDPOINT` | unset: offline crawler |
//! | `CODEEDU_MAX_TURNS` | `20` |
//!
//! Provider keys are read only from `CODEEDU_PROVIDER_<ID>_KEY`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use codeedu_core::dataset::{load_problems, toy_problems};
use codeedu_core::fixtures;
use codeedu_core::llm::{Gateway, ProviderConfig};
use codeedu_core::prompts::PromptSet;
use codeedu_core::session::{Engine, EngineConfig, DEFAULT_MAX_TURNS};
use codeedu_core::tools::{Crawler, PythonSandbox, SandboxPolicy};
use thiserror::Error;

pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{var}: {message}")]
    Invalid { var: &'static str, message: String },
    #[error("building the engine: {0}")]
    Engine(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub bind_addr: SocketAddr,
    pub workspace_root: PathBuf,
    pub provider_config: Option<PathBuf>,
    pub problems: Option<PathBuf>,
    pub crawler_endpoint: Option<String>,
    pub max_turns: usize,
}

impl ServerConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let set = |k: &str| get(k).filter(|v| !v.trim().is_empty());
        let bind = set("CODEEDU_BIND_ADDR").unwrap_or_else(|| DEFAULT_BIND_ADDR.into());
        let bind_addr = bind.parse().map_err(|e| ConfigError::Invalid {
            var: "CODEEDU_BIND_ADDR",
            message: format!("{bind}: {e}"),
        })?;
        let max_turns = match set("CODEEDU_MAX_TURNS") {
            None => DEFAULT_MAX_TURNS,
            Some(v) => v.parse().ok().filter(|n| *n > 0).ok_or_else(|| ConfigError::Invalid {
                var: "CODEEDU_MAX_TURNS",
                message: format!("{v} is not a positive integer"),
            })?,
        };
        Ok(Self {
            bind_addr,
            workspace_root: set("CODEEDU_WORKSPACE_ROOT")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("codeedu-workspace")),
            provider_config: set("CODEEDU_PROVIDER_CONFIG").map(PathBuf::from),
            problems: set("CODEEDU_PROBLEMS").map(PathBuf::from),
            crawler_endpoint: set("CODEEDU_CRAWLER_ENDPOINT"),
            max_turns,
        })
    }

    pub fn is_mock(&self) -> bool {
        self.provider_config.is_none()
    }

    pub fn build_engine(&self) -> Result<Engine, ConfigError> {
        let engine_err = |e: &dyn std::fmt::Display| ConfigError::Engine(e.to_string());
        let problems = match &self.problems {
            Some(path) => load_problems(path, None).map_err(|e| engine_err(&e))?,
            None => toy_problems(),
        };
        let (gateway, mut crawler) = match &self.provider_config {
            None => {
                let dir = self.workspace_root.join("fixtures");
                fixtures::write_bundled(&dir).map_err(|e| engine_err(&e))?;
                let gateway = fixtures::mock_gateway(&dir).map_err(|e| engine_err(&e))?;
                (gateway, fixtures::corpus_crawler(&dir))
            }
            Some(path) => {
                let gateway = Gateway::new();
                ProviderConfig::load(path)
                    .and_then(|c| c.install(&gateway))
                    .map_err(|e| engine_err(&e))?;
                (gateway, Crawler::default())
            }
        };
        if let Some(endpoint) = &self.crawler_endpoint {
            crawler = Crawler::Live { endpoint: endpoint.clone() };
        }
        let mut config = EngineConfig::new(&self.workspace_root);
        config.max_turns = self.max_turns;
        Engine::new(
            config,
            Arc::new(gateway),
            Arc::new(PythonSandbox::new(self.workspace_root.join("scratch"))),
            crawler,
            SandboxPolicy::default(),
            problems,
            &PromptSet::default(),
        )
        .map_err(|e| engine_err(&e))
    }
}

//! Provider-agnostic chat completion.
//!
//! Every agent, the simulated students, and the judges talk to models through
//! [`Gateway`]. A gateway owns a registry of providers and one
//! [`ModelBinding`] per role; the role named in a binding decides which model
//! answers. [`MockProvider`] serves scripted fixtures so that everything above
//! this layer can be tested offline.

mod config;
mod http;
mod mock;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{api_key_env_var, BindingConfig, ConfigError, ProviderConfig, ProviderEntry};
pub use http::OpenAiCompatProvider;
pub use mock::{
    FixtureEntry, FixtureMode, Matcher, MockProvider, MockScript, RecordedRequest, ScriptedFixture,
};

/// Speaker of a chat message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
            Role::Tool => "tool",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_agent: Option<String>,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
            author_agent: None,
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }

    pub fn tool(content: impl Into<String>) -> Self {
        Self::new(Role::Tool, content)
    }

    pub fn authored_by(mut self, agent: impl Into<String>) -> Self {
        self.author_agent = Some(agent.into());
        self
    }

    /// User and assistant messages must carry text.
    pub fn validate(&self) -> Result<(), LlmError> {
        if matches!(self.role, Role::User | Role::Assistant) && self.content.trim().is_empty() {
            return Err(LlmError::InvalidRequest(format!(
                "{} message with empty content",
                self.role
            )));
        }
        Ok(())
    }
}

/// Which provider and model serve one role, and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBinding {
    pub agent_role: String,
    pub provider_id: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 1024;

/// Temperature used for a role when the configuration does not say.
pub fn default_temperature(agent_role: &str) -> f64 {
    if agent_role == "programmer" {
        0.2
    } else {
        0.7
    }
}

impl ModelBinding {
    pub fn new(
        agent_role: impl Into<String>,
        provider_id: impl Into<String>,
        model_name: impl Into<String>,
    ) -> Self {
        let agent_role = agent_role.into();
        let temperature = default_temperature(&agent_role);
        Self {
            agent_role,
            provider_id: provider_id.into(),
            model_name: model_name.into(),
            temperature,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    /// Same provider and model, answering under a different role name.
    pub fn for_role(&self, agent_role: impl Into<String>) -> Self {
        Self {
            agent_role: agent_role.into(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidBinding(format!(
                "temperature {} for role {} is outside [0, 2]",
                self.temperature, self.agent_role
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(LlmError::InvalidBinding(format!(
                "max_output_tokens must be positive for role {}",
                self.agent_role
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub finish_reason: FinishReason,
    pub usage: Usage,
}

impl CompletionResult {
    pub fn stop(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            finish_reason: FinishReason::Stop,
            usage: Usage::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid model binding: {0}")]
    InvalidBinding(String),
    #[error("provider {provider} unreachable after {retries} retries: {message}")]
    Unreachable {
        provider: String,
        retries: u32,
        message: String,
    },
    #[error("provider {provider} rate limited the request")]
    RateLimited { provider: String },
    #[error("scripted fixture for role {role} is exhausted after {served} responses")]
    FixtureExhausted { role: String, served: usize },
    #[error("scripted fixture for role {role} has {candidates} equally specific matches")]
    AmbiguousFixture { role: String, candidates: usize },
    #[error("no scripted fixture entry matches the request for role {role}")]
    NoFixtureMatch { role: String },
    #[error("provider {0} is already registered")]
    DuplicateProvider(String),
    #[error("no model binding for role {0}")]
    MissingBinding(String),
    #[error("provider {provider} returned an unusable response: {message}")]
    BadResponse { provider: String, message: String },
}

/// A chat completion backend.
pub trait ChatProvider: Send + Sync {
    fn complete(
        &self,
        binding: &ModelBinding,
        messages: &[ChatMessage],
    ) -> Result<CompletionResult, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    pub fn no_wait() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::ZERO,
        }
    }
}

/// Provider registry plus per-role model bindings.
pub struct Gateway {
    providers: RwLock<BTreeMap<String, Arc<dyn ChatProvider>>>,
    bindings: RwLock<BTreeMap<String, ModelBinding>>,
    retry: RetryPolicy,
}

impl Default for Gateway {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let providers: Vec<String> = self
            .providers
            .read()
            .expect("provider registry poisoned")
            .keys()
            .cloned()
            .collect();
        f.debug_struct("Gateway")
            .field("providers", &providers)
            .field("retry", &self.retry)
            .finish()
    }
}

impl Gateway {
    pub fn new() -> Self {
        Self::with_retry(RetryPolicy::default())
    }

    pub fn with_retry(retry: RetryPolicy) -> Self {
        Self {
            providers: RwLock::new(BTreeMap::new()),
            bindings: RwLock::new(BTreeMap::new()),
            retry,
        }
    }

    /// A gateway with a single mock provider registered as `"mock"` and every
    /// listed role bound to it.
    pub fn mock(provider: MockProvider, roles: &[&str]) -> Self {
        let gateway = Self::with_retry(RetryPolicy::no_wait());
        gateway
            .register_provider("mock", Arc::new(provider))
            .expect("fresh gateway");
        for role in roles {
            gateway
                .bind(ModelBinding::new(*role, "mock", "scripted"))
                .expect("default binding is valid");
        }
        gateway
    }

    pub fn register_provider(
        &self,
        provider_id: impl Into<String>,
        provider: Arc<dyn ChatProvider>,
    ) -> Result<(), LlmError> {
        let provider_id = provider_id.into();
        let mut providers = self.providers.write().expect("provider registry poisoned");
        if providers.contains_key(&provider_id) {
            return Err(LlmError::DuplicateProvider(provider_id));
        }
        providers.insert(provider_id, provider);
        Ok(())
    }

    pub fn has_provider(&self, provider_id: &str) -> bool {
        self.providers
            .read()
            .expect("provider registry poisoned")
            .contains_key(provider_id)
    }

    /// Installs or replaces the binding for `binding.agent_role`.
    pub fn bind(&self, binding: ModelBinding) -> Result<(), LlmError> {
        binding.validate()?;
        self.bindings
            .write()
            .expect("binding table poisoned")
            .insert(binding.agent_role.clone(), binding);
        Ok(())
    }

    pub fn binding(&self, agent_role: &str) -> Result<ModelBinding, LlmError> {
        self.bindings
            .read()
            .expect("binding table poisoned")
            .get(agent_role)
            .cloned()
            .ok_or_else(|| LlmError::MissingBinding(agent_role.to_string()))
    }

    /// Binding for `agent_role`, or the `fallback_role` binding renamed.
    pub fn binding_or(&self, agent_role: &str, fallback_role: &str) -> Result<ModelBinding, LlmError> {
        match self.binding(agent_role) {
            Ok(b) => Ok(b),
            Err(_) => Ok(self.binding(fallback_role)?.for_role(agent_role)),
        }
    }

    /// Startup check: each role must have exactly one binding whose provider
    /// is registered.
    pub fn validate_roles<'a>(&self, roles: impl IntoIterator<Item = &'a str>) -> Result<(), LlmError> {
        for role in roles {
            let binding = self.binding(role)?;
            if !self.has_provider(&binding.provider_id) {
                return Err(LlmError::Unreachable {
                    provider: binding.provider_id,
                    retries: 0,
                    message: "provider is not registered".into(),
                });
            }
        }
        Ok(())
    }

    pub fn complete(
        &self,
        binding: &ModelBinding,
        messages: &[ChatMessage],
    ) -> Result<CompletionResult, LlmError> {
        if messages.is_empty() {
            return Err(LlmError::InvalidRequest("messages must not be empty".into()));
        }
        for m in messages {
            m.validate()?;
        }
        binding.validate()?;
        let provider = self
            .providers
            .read()
            .expect("provider registry poisoned")
            .get(&binding.provider_id)
            .cloned()
            .ok_or_else(|| LlmError::Unreachable {
                provider: binding.provider_id.clone(),
                retries: 0,
                message: "provider is not registered".into(),
            })?;

        let mut backoff = self.retry.initial_backoff;
        let mut attempt = 0;
        loop {
            match provider.complete(binding, messages) {
                Err(LlmError::Unreachable { message, .. }) if attempt < self.retry.max_retries => {
                    tracing::warn!(
                        provider = %binding.provider_id,
                        attempt,
                        %message,
                        "provider unreachable, retrying"
                    );
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(LlmError::Unreachable { message, provider, .. }) => {
                    return Err(LlmError::Unreachable {
                        provider,
                        retries: attempt,
                        message,
                    })
                }
                other => return other,
            }
        }
    }

    /// Looks up the binding for `agent_role` and completes.
    pub fn complete_as(
        &self,
        agent_role: &str,
        messages: &[ChatMessage],
    ) -> Result<CompletionResult, LlmError> {
        let binding = self.binding(agent_role)?;
        self.complete(&binding, messages)
    }
}

//! OpenAI-compatible `/chat/completions` client.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    ChatMessage, ChatProvider, CompletionResult, FinishReason, LlmError, ModelBinding, Role, Usage,
};

pub struct OpenAiCompatProvider {
    id: String,
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for OpenAiCompatProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenAiCompatProvider")
            .field("id", &self.id)
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireAnswer,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireAnswer {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl OpenAiCompatProvider {
    pub fn new(id: impl Into<String>, base_url: impl Into<String>, api_key: Option<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build();
        Self {
            id: id.into(),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            agent: config.into(),
        }
    }

    fn wire_role(role: Role) -> &'static str {
        match role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
            // Tool observations are replayed as user turns; the engine's
            // action protocol is plain text, not native function calling.
            Role::Tool => "user",
        }
    }
}

impl ChatProvider for OpenAiCompatProvider {
    fn complete(
        &self,
        binding: &ModelBinding,
        messages: &[ChatMessage],
    ) -> Result<CompletionResult, LlmError> {
        let body = WireRequest {
            model: &binding.model_name,
            messages: messages
                .iter()
                .map(|m| WireMessage {
                    role: Self::wire_role(m.role),
                    content: &m.content,
                })
                .collect(),
            temperature: binding.temperature,
            max_tokens: binding.max_output_tokens,
        };
        let url = format!("{}/chat/completions", self.base_url);
        let mut req = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(429)) => {
                return Err(LlmError::RateLimited {
                    provider: self.id.clone(),
                })
            }
            Err(ureq::Error::StatusCode(code)) if code >= 500 => {
                return Err(LlmError::Unreachable {
                    provider: self.id.clone(),
                    retries: 0,
                    message: format!("HTTP {code}"),
                })
            }
            Err(ureq::Error::StatusCode(code)) => {
                return Err(LlmError::BadResponse {
                    provider: self.id.clone(),
                    message: format!("HTTP {code}"),
                })
            }
            Err(e) => {
                return Err(LlmError::Unreachable {
                    provider: self.id.clone(),
                    retries: 0,
                    message: e.to_string(),
                })
            }
        };
        let parsed: WireResponse =
            resp.body_mut()
                .read_json()
                .map_err(|e| LlmError::BadResponse {
                    provider: self.id.clone(),
                    message: e.to_string(),
                })?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::BadResponse {
                provider: self.id.clone(),
                message: "no choices".into(),
            })?;
        let text = choice.message.content.unwrap_or_default();
        let finish_reason = match choice.finish_reason.as_deref() {
            Some("length") => FinishReason::Length,
            _ if text.is_empty() => FinishReason::Error,
            _ => FinishReason::Stop,
        };
        let usage = parsed
            .usage
            .map(|u| Usage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            })
            .unwrap_or_default();
        Ok(CompletionResult {
            text,
            finish_reason,
            usage,
        })
    }
}

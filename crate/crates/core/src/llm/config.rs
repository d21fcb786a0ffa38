//! Provider configuration file and credential lookup.
//!
//! ```json
//! { "providers": [{"id": "openai", "base_url": "https://api.openai.com/v1", "model_names": ["gpt-4o"]}],
//!   "bindings":  [{"agent_role": "programmer", "provider_id": "openai", "model_name": "gpt-4o", "temperature": 0.2}] }
//! ```
//!
//! API keys never live in this file. They are read from
//! `CODEEDU_PROVIDER_<ID>_KEY`.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{default_temperature, Gateway, LlmError, ModelBinding, OpenAiCompatProvider, DEFAULT_MAX_OUTPUT_TOKENS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading provider config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing provider config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("provider config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gateway(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderEntry {
    pub id: String,
    pub base_url: String,
    #[serde(default)]
    pub model_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingConfig {
    pub agent_role: String,
    pub provider_id: String,
    pub model_name: String,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub providers: Vec<ProviderEntry>,
    pub bindings: Vec<BindingConfig>,
}

/// `CODEEDU_PROVIDER_<ID>_KEY`, with the id upper-cased and every
/// non-alphanumeric character replaced by `_`.
pub fn api_key_env_var(provider_id: &str) -> String {
    let id: String = provider_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect();
    format!("CODEEDU_PROVIDER_{id}_KEY")
}

impl ProviderConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut ids = BTreeSet::new();
        for p in &self.providers {
            if !ids.insert(p.id.as_str()) {
                return Err(ConfigError::Invalid(format!("duplicate provider id {}", p.id)));
            }
        }
        let mut roles = BTreeSet::new();
        for b in &self.bindings {
            if !roles.insert(b.agent_role.as_str()) {
                return Err(ConfigError::Invalid(format!(
                    "role {} has more than one binding",
                    b.agent_role
                )));
            }
            let provider = self
                .providers
                .iter()
                .find(|p| p.id == b.provider_id)
                .ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "binding for {} names unknown provider {}",
                        b.agent_role, b.provider_id
                    ))
                })?;
            if !provider.model_names.is_empty() && !provider.model_names.contains(&b.model_name) {
                return Err(ConfigError::Invalid(format!(
                    "provider {} does not offer model {}",
                    provider.id, b.model_name
                )));
            }
            self.model_binding(b).validate()?;
        }
        Ok(())
    }

    fn model_binding(&self, b: &BindingConfig) -> ModelBinding {
        ModelBinding {
            agent_role: b.agent_role.clone(),
            provider_id: b.provider_id.clone(),
            model_name: b.model_name.clone(),
            temperature: b
                .temperature
                .unwrap_or_else(|| default_temperature(&b.agent_role)),
            max_output_tokens: b.max_output_tokens.unwrap_or(DEFAULT_MAX_OUTPUT_TOKENS),
        }
    }

    pub fn model_bindings(&self) -> Vec<ModelBinding> {
        self.bindings.iter().map(|b| self.model_binding(b)).collect()
    }

    /// Registers an HTTP provider per entry (keys from the environment) and
    /// installs every binding. Providers already present on the gateway, such
    /// as a mock, are left alone.
    pub fn install(&self, gateway: &Gateway) -> Result<(), ConfigError> {
        self.validate()?;
        for p in &self.providers {
            if gateway.has_provider(&p.id) {
                continue;
            }
            let key = std::env::var(api_key_env_var(&p.id)).ok();
            gateway.register_provider(
                p.id.clone(),
                Arc::new(OpenAiCompatProvider::new(p.id.clone(), p.base_url.clone(), key)),
            )?;
        }
        for b in self.model_bindings() {
            gateway.bind(b)?;
        }
        Ok(())
    }
}

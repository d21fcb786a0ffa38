//! Scripted mock provider.
//!
//! A fixture is either a queue (index mode, the default) or a set of substring
//! rules (substring mode). Fixtures are scoped per role: a request is answered
//! by the fixture registered for `binding.agent_role`, falling back to the
//! default fixture.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatMessage, ChatProvider, CompletionResult, LlmError, ModelBinding, Usage};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureMode {
    #[default]
    Index,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matcher {
    /// Answers the n-th request (0-based) made against this fixture.
    Index { index: usize },
    /// Answers a request whose transcript contains every listed substring.
    /// An empty list matches anything.
    Contains { contains: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    #[serde(flatten)]
    pub matcher: Matcher,
    pub response: String,
    /// Substring entries only: keep the entry after it has been served.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repeat: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedFixture {
    #[serde(default)]
    pub mode: FixtureMode,
    pub entries: Vec<FixtureEntry>,
}

impl ScriptedFixture {
    pub fn indexed<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries = responses
            .into_iter()
            .enumerate()
            .map(|(index, r)| FixtureEntry {
                matcher: Matcher::Index { index },
                response: r.into(),
                repeat: false,
            })
            .collect();
        Self {
            mode: FixtureMode::Index,
            entries,
        }
    }

    pub fn substring() -> Self {
        Self {
            mode: FixtureMode::Substring,
            entries: Vec::new(),
        }
    }

    /// Adds a substring rule that is served once.
    pub fn once<I, S>(mut self, contains: I, response: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entries.push(FixtureEntry {
            matcher: Matcher::Contains {
                contains: contains.into_iter().map(Into::into).collect(),
            },
            response: response.into(),
            repeat: false,
        });
        self
    }

    /// Adds a substring rule that can be served any number of times.
    pub fn always<I, S>(mut self, contains: I, response: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entries.push(FixtureEntry {
            matcher: Matcher::Contains {
                contains: contains.into_iter().map(Into::into).collect(),
            },
            response: response.into(),
            repeat: true,
        });
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.mode {
            FixtureMode::Index => {
                for (pos, e) in self.entries.iter().enumerate() {
                    match e.matcher {
                        Matcher::Index { index } if index == pos => {}
                        Matcher::Index { index } => {
                            return Err(format!(
                                "index entry {index} found at position {pos}; entries must be listed in order"
                            ))
                        }
                        Matcher::Contains { .. } => {
                            return Err("substring matcher in an index-mode fixture".into())
                        }
                    }
                }
            }
            FixtureMode::Substring => {
                if self
                    .entries
                    .iter()
                    .any(|e| matches!(e.matcher, Matcher::Index { .. }))
                {
                    return Err("index matcher in a substring-mode fixture".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
struct FixtureState {
    fixture: ScriptedFixture,
    consumed: Vec<bool>,
    served: usize,
}

impl FixtureState {
    fn new(fixture: ScriptedFixture) -> Self {
        let consumed = vec![false; fixture.entries.len()];
        Self {
            fixture,
            consumed,
            served: 0,
        }
    }

    fn answer(&mut self, role: &str, messages: &[ChatMessage]) -> Result<String, LlmError> {
        match self.fixture.mode {
            FixtureMode::Index => {
                let entry = self.fixture.entries.get(self.served).ok_or_else(|| {
                    LlmError::FixtureExhausted {
                        role: role.to_string(),
                        served: self.served,
                    }
                })?;
                let response = entry.response.clone();
                self.consumed[self.served] = true;
                self.served += 1;
                Ok(response)
            }
            FixtureMode::Substring => {
                let transcript = messages
                    .iter()
                    .map(|m| m.content.as_str())
                    .collect::<Vec<_>>()
                    .join("\n");
                let mut best: Vec<usize> = Vec::new();
                let mut best_specificity = 0usize;
                for (i, entry) in self.fixture.entries.iter().enumerate() {
                    if self.consumed[i] {
                        continue;
                    }
                    let Matcher::Contains { contains } = &entry.matcher else {
                        continue;
                    };
                    if !contains.iter().all(|s| transcript.contains(s.as_str())) {
                        continue;
                    }
                    let specificity = contains.len();
                    if best.is_empty() || specificity > best_specificity {
                        best.clear();
                        best.push(i);
                        best_specificity = specificity;
                    } else if specificity == best_specificity {
                        best.push(i);
                    }
                }
                match best.as_slice() {
                    [i] => {
                        let entry = &self.fixture.entries[*i];
                        if !entry.repeat {
                            self.consumed[*i] = true;
                        }
                        self.served += 1;
                        Ok(entry.response.clone())
                    }
                    [] if self.consumed.iter().all(|c| *c) => Err(LlmError::FixtureExhausted {
                        role: role.to_string(),
                        served: self.served,
                    }),
                    [] => Err(LlmError::NoFixtureMatch {
                        role: role.to_string(),
                    }),
                    many => Err(LlmError::AmbiguousFixture {
                        role: role.to_string(),
                        candidates: many.len(),
                    }),
                }
            }
        }
    }
}

/// A request seen by the mock, kept for assertions in tests.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedRequest {
    pub agent_role: String,
    pub messages: Vec<ChatMessage>,
}

/// On-disk form of a mock script: `{ "default": fixture, "roles": { role: fixture } }`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub default: Option<ScriptedFixture>,
    #[serde(default)]
    pub roles: BTreeMap<String, ScriptedFixture>,
}

#[derive(Debug, Default)]
pub struct MockProvider {
    default: Option<Mutex<FixtureState>>,
    roles: BTreeMap<String, Mutex<FixtureState>>,
    log: Mutex<Vec<RecordedRequest>>,
}

impl MockProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_default(mut self, fixture: ScriptedFixture) -> Self {
        fixture.validate().expect("invalid fixture");
        self.default = Some(Mutex::new(FixtureState::new(fixture)));
        self
    }

    pub fn with_fixture(mut self, role: impl Into<String>, fixture: ScriptedFixture) -> Self {
        fixture.validate().expect("invalid fixture");
        self.roles
            .insert(role.into(), Mutex::new(FixtureState::new(fixture)));
        self
    }

    pub fn from_script(script: MockScript) -> Result<Self, String> {
        let mut provider = Self::new();
        if let Some(d) = script.default {
            d.validate()?;
            provider.default = Some(Mutex::new(FixtureState::new(d)));
        }
        for (role, fixture) in script.roles {
            fixture
                .validate()
                .map_err(|e| format!("fixture for role {role}: {e}"))?;
            provider.roles.insert(role, Mutex::new(FixtureState::new(fixture)));
        }
        Ok(provider)
    }

    /// Reads a [`MockScript`] from a JSON file.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| format!("reading {}: {e}", path.display()))?;
        let script: MockScript =
            serde_json::from_str(&raw).map_err(|e| format!("parsing {}: {e}", path.display()))?;
        Self::from_script(script)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.log.lock().expect("mock log poisoned").clone()
    }

    pub fn requests_for(&self, role: &str) -> Vec<RecordedRequest> {
        self.requests()
            .into_iter()
            .filter(|r| r.agent_role == role)
            .collect()
    }
}

impl ChatProvider for MockProvider {
    fn complete(
        &self,
        binding: &ModelBinding,
        messages: &[ChatMessage],
    ) -> Result<CompletionResult, LlmError> {
        let role = binding.agent_role.as_str();
        self.log
            .lock()
            .expect("mock log poisoned")
            .push(RecordedRequest {
                agent_role: role.to_string(),
                messages: messages.to_vec(),
            });
        let state = self
            .roles
            .get(role)
            .or(self.default.as_ref())
            .ok_or_else(|| LlmError::NoFixtureMatch {
                role: role.to_string(),
            })?;
        let text = state
            .lock()
            .expect("fixture state poisoned")
            .answer(role, messages)?;
        let prompt_tokens = messages
            .iter()
            .map(|m| m.content.split_whitespace().count() as u64)
            .sum();
        let completion_tokens = text.split_whitespace().count() as u64;
        Ok(CompletionResult {
            text,
            finish_reason: super::FinishReason::Stop,
            usage: Usage {
                prompt_tokens,
                completion_tokens,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binding(role: &str) -> ModelBinding {
        ModelBinding::new(role, "mock", "scripted")
    }

    fn ask(p: &MockProvider, role: &str, text: &str) -> Result<String, LlmError> {
        p.complete(&binding(role), &[ChatMessage::user(text)])
            .map(|c| c.text)
    }

    #[test]
    fn index_fixture_serves_in_order() {
        let p = MockProvider::new().with_default(ScriptedFixture::indexed(["a", "b"]));
        assert_eq!(ask(&p, "x", "1").unwrap(), "a");
        assert_eq!(ask(&p, "x", "2").unwrap(), "b");
        assert!(matches!(
            ask(&p, "x", "3"),
            Err(LlmError::FixtureExhausted { served: 2, .. })
        ));
    }

    #[test]
    fn role_fixtures_are_independent() {
        let p = MockProvider::new()
            .with_fixture("tutor", ScriptedFixture::indexed(["t0"]))
            .with_default(ScriptedFixture::indexed(["d0"]));
        assert_eq!(ask(&p, "researcher", "q").unwrap(), "d0");
        assert_eq!(ask(&p, "tutor", "q").unwrap(), "t0");
    }

    #[test]
    fn substring_prefers_most_specific_rule() {
        let f = ScriptedFixture::substring()
            .always(Vec::<String>::new(), "fallback")
            .always(["loop"], "about loops")
            .always(["loop", "while"], "about while loops");
        let p = MockProvider::new().with_default(f);
        assert_eq!(ask(&p, "x", "anything").unwrap(), "fallback");
        assert_eq!(ask(&p, "x", "a for loop").unwrap(), "about loops");
        assert_eq!(ask(&p, "x", "a while loop").unwrap(), "about while loops");
    }

    #[test]
    fn substring_ambiguity_is_an_error() {
        let f = ScriptedFixture::substring()
            .always(["a"], "1")
            .always(["b"], "2");
        let p = MockProvider::new().with_default(f);
        assert!(matches!(
            ask(&p, "x", "a b"),
            Err(LlmError::AmbiguousFixture { candidates: 2, .. })
        ));
    }

    #[test]
    fn substring_once_entries_are_consumed() {
        let f = ScriptedFixture::substring().once(["q"], "first");
        let p = MockProvider::new().with_default(f);
        assert_eq!(ask(&p, "x", "q").unwrap(), "first");
        assert!(matches!(
            ask(&p, "x", "q"),
            Err(LlmError::FixtureExhausted { .. })
        ));
    }

    #[test]
    fn fixture_json_round_trip() {
        let raw = r#"{"mode":"substring","entries":[
            {"contains":["x"],"response":"r","repeat":true},
            {"contains":[],"response":"f"}]}"#;
        let f: ScriptedFixture = serde_json::from_str(raw).unwrap();
        assert_eq!(f.mode, FixtureMode::Substring);
        assert!(f.entries[0].repeat);
        assert!(!f.entries[1].repeat);
        let idx: ScriptedFixture =
            serde_json::from_str(r#"{"entries":[{"index":0,"response":"Hello"}]}"#).unwrap();
        assert_eq!(idx.mode, FixtureMode::Index);
        idx.validate().unwrap();
    }

    #[test]
    fn out_of_order_index_entries_rejected() {
        let f: ScriptedFixture =
            serde_json::from_str(r#"{"entries":[{"index":1,"response":"x"}]}"#).unwrap();
        assert!(f.validate().is_err());
    }

    #[test]
    fn identical_scripts_give_identical_sequences() {
        let make = || {
            MockProvider::new().with_default(
                ScriptedFixture::substring()
                    .once(["a"], "1")
                    .always(["a"], "2")
                    .always(Vec::<String>::new(), "3"),
            )
        };
        let requests = ["a", "a", "b", "a"];
        let run = |p: MockProvider| -> Vec<String> {
            requests
                .iter()
                .map(|r| ask(&p, "x", r).unwrap_or_else(|e| e.to_string()))
                .collect()
        };
        assert_eq!(run(make()), run(make()));
    }
}

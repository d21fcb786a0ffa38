//! Learning material produced by the Researcher.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Source reference for content that does not come from a crawled page.
pub const MODEL_INTERNAL: &str = "model-internal";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialSection {
    pub heading: String,
    pub body: String,
    pub source_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningMaterial {
    pub topic: String,
    pub sections: Vec<MaterialSection>,
    pub generated_for: String,
}

#[derive(Deserialize)]
struct SectionDraft {
    #[serde(default)]
    heading: String,
    #[serde(default)]
    body: String,
    #[serde(default)]
    source_refs: Vec<String>,
}

#[derive(Deserialize)]
struct MaterialDraft {
    #[serde(default)]
    topic: Option<String>,
    sections: Vec<SectionDraft>,
}

impl LearningMaterial {
    /// Builds material from the Researcher's final artifact: a JSON object
    /// `{topic, sections: [{heading, body, source_refs}]}` (possibly encoded
    /// as a string), or free text taken as one section. References to URLs
    /// not in `known_urls` are dropped; a section left without references is
    /// marked model-internal.
    pub fn from_artifact(
        artifact: &Value,
        default_topic: &str,
        known_urls: &BTreeSet<String>,
        session_id: &str,
    ) -> Option<Self> {
        let draft = match artifact {
            Value::Object(_) => serde_json::from_value::<MaterialDraft>(artifact.clone()).ok(),
            Value::String(s) => serde_json::from_str::<MaterialDraft>(s.trim()).ok().or_else(|| {
                (!s.trim().is_empty()).then(|| MaterialDraft {
                    topic: None,
                    sections: vec![SectionDraft {
                        heading: default_topic.to_string(),
                        body: s.trim().to_string(),
                        source_refs: Vec::new(),
                    }],
                })
            }),
            _ => None,
        }?;
        let sections: Vec<MaterialSection> = draft
            .sections
            .into_iter()
            .filter(|s| !s.body.trim().is_empty() || !s.heading.trim().is_empty())
            .map(|s| {
                let mut refs: Vec<String> = Vec::new();
                for r in s.source_refs {
                    let keep = r == MODEL_INTERNAL || known_urls.contains(&r);
                    if keep && !refs.contains(&r) {
                        refs.push(r);
                    }
                }
                if refs.is_empty() {
                    refs.push(MODEL_INTERNAL.to_string());
                }
                MaterialSection {
                    heading: s.heading,
                    body: s.body,
                    source_refs: refs,
                }
            })
            .collect();
        if sections.is_empty() {
            return None;
        }
        Some(Self {
            topic: draft
                .topic
                .filter(|t| !t.trim().is_empty())
                .unwrap_or_else(|| default_topic.to_string()),
            sections,
            generated_for: session_id.to_string(),
        })
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# {}\n", self.topic);
        for sec in &self.sections {
            s.push_str(&format!("\n## {}\n\n{}\n\nSources: {}\n", sec.heading, sec.body.trim_end(), sec.source_refs.join(", ")));
        }
        s
    }

    /// Leading part of the rendered material for prompts.
    pub fn excerpt(&self, max_chars: usize) -> String {
        self.to_markdown().chars().take(max_chars).collect()
    }
}

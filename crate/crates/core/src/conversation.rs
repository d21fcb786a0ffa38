//! Append-only conversation history of one session: chat messages and the
//! outcomes of agent tasks, in the order they happened.

use serde::{Deserialize, Serialize};

use crate::agents::{OutcomeStatus, TaskOutcome};
use crate::llm::ChatMessage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub task_id: String,
    pub agent_id: String,
    pub status: OutcomeStatus,
    /// Names of the artifacts the task produced.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum HistoryEntry {
    Message(ChatMessage),
    Outcome(OutcomeRecord),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConversationHistory {
    entries: Vec<HistoryEntry>,
}

impl ConversationHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_message(&mut self, message: ChatMessage) {
        self.entries.push(HistoryEntry::Message(message));
    }

    pub fn push_outcome(&mut self, agent_id: &str, outcome: &TaskOutcome) {
        self.entries.push(HistoryEntry::Outcome(OutcomeRecord {
            task_id: outcome.task_id.clone(),
            agent_id: agent_id.to_string(),
            status: outcome.status,
            artifacts: outcome.artifacts.keys().cloned().collect(),
        }));
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn messages(&self) -> impl Iterator<Item = &ChatMessage> {
        self.entries.iter().filter_map(|e| match e {
            HistoryEntry::Message(m) => Some(m),
            HistoryEntry::Outcome(_) => None,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The last `max_messages` chat messages as `role: content` lines.
    pub fn excerpt(&self, max_messages: usize) -> String {
        let messages: Vec<&ChatMessage> = self.messages().collect();
        let start = messages.len().saturating_sub(max_messages);
        messages[start..]
            .iter()
            .map(|m| format!("{}: {}", m.role, m.content))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

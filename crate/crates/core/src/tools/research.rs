//! Deep research engine: a model call that explains a question in context.

use thiserror::Error;

use crate::llm::{ChatMessage, Gateway, LlmError, ModelBinding};
use crate::prompts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResearchError {
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error(transparent)]
    Llm(#[from] LlmError),
}

pub fn research_prompt(context: &str, question: &str) -> String {
    let context = if context.trim().is_empty() {
        "(no additional context)"
    } else {
        context
    };
    format!("Context:\n{context}\n\nQuestion:\n{question}")
}

pub fn deep_research(
    gateway: &Gateway,
    binding: &ModelBinding,
    context: &str,
    question: &str,
) -> Result<String, ResearchError> {
    if question.trim().is_empty() {
        return Err(ResearchError::EmptyQuestion);
    }
    let messages = [
        ChatMessage::system(prompts::DEEP_RESEARCH),
        ChatMessage::user(research_prompt(context, question)),
    ];
    Ok(gateway.complete(binding, &messages)?.text)
}

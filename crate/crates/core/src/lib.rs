//! Multi-agent coding tutor.

pub mod agents;
pub mod conversation;
pub mod dataset;
pub mod eval;
pub mod fixtures;
pub mod llm;
pub mod planner;
pub mod profile;
pub mod prompts;
pub mod session;
pub mod tools;

//! Simulated students.
//!
//! What a student is told depends on its level: low sees the statement;
//! medium adds the background concepts; high adds sample code and the
//! reference solution.

use serde::{Deserialize, Serialize};

use crate::dataset::Problem;
use crate::llm::{ChatMessage, Gateway, LlmError, ModelBinding};
use crate::profile::Level;

/// Role name used for student bindings.
pub const STUDENT_ROLE: &str = "student";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestPhase {
    Pre,
    Post,
}

impl TestPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            TestPhase::Pre => "pre",
            TestPhase::Post => "post",
        }
    }
}

/// One exchange of a tutoring dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub student: String,
    pub tutor: String,
}

/// The problem text a student at `level` may see.
pub fn exposure(level: Level, problem: &Problem) -> String {
    let mut s = format!("Problem {}\n\nStatement:\n{}\n", problem.problem_id, problem.statement);
    if level >= Level::Medium {
        s.push_str(&format!("\nBackground concepts:\n{}\n", problem.concepts));
    }
    if level == Level::High {
        if let Some(code) = &problem.sample_code {
            s.push_str(&format!("\nSample code:\n```python\n{}\n```\n", code.trim_end()));
        }
        if let Some(code) = &problem.reference_solution {
            s.push_str(&format!("\nOptimized solution example:\n```python\n{}\n```\n", code.trim_end()));
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct SimulatedStudent {
    pub level: Level,
    pub problem_id: String,
    pub system_prompt: String,
    pub binding: ModelBinding,
}

pub fn build_student(level: Level, problem: &Problem, binding: ModelBinding) -> SimulatedStudent {
    let system_prompt = format!(
        "{}\n\nStudent level: {level}\n\n{}",
        crate::prompts::STUDENT.trim_end(),
        exposure(level, problem)
    );
    SimulatedStudent {
        level,
        problem_id: problem.problem_id.clone(),
        system_prompt,
        binding,
    }
}

impl SimulatedStudent {
    /// The student's view: its own lines are assistant messages, the
    /// tutor's are user messages.
    fn messages(&self, dialogue: &[Exchange], instruction: String) -> Vec<ChatMessage> {
        let mut msgs = vec![ChatMessage::system(self.system_prompt.clone())];
        for e in dialogue {
            msgs.push(ChatMessage::assistant(e.student.clone()));
            msgs.push(ChatMessage::user(format!("Tutor: {}", e.tutor)));
        }
        msgs.push(ChatMessage::user(instruction));
        msgs
    }

    /// The student's next message to the tutor.
    pub fn speak(&self, gateway: &Gateway, dialogue: &[Exchange], turn: usize, max_turns: usize) -> Result<String, LlmError> {
        let instruction = format!(
            "[tutoring] turn {turn}/{max_turns}: write your next message to the tutor about problem {}.",
            self.problem_id
        );
        let reply = gateway.complete(&self.binding, &self.messages(dialogue, instruction))?;
        Ok(reply.text.trim().to_string())
    }

    /// Asks for submission `attempt` (1-based) of `k`. Returns the raw reply.
    pub fn submit(
        &self,
        gateway: &Gateway,
        dialogue: &[Exchange],
        phase: TestPhase,
        attempt: usize,
        k: usize,
    ) -> Result<String, LlmError> {
        let instruction = format!(
            "[{}-test] attempt {attempt}/{k}: submit your solution to problem {} as one ```python code block.",
            phase.as_str(),
            self.problem_id
        );
        Ok(gateway.complete(&self.binding, &self.messages(dialogue, instruction))?.text)
    }
}

/// Contents of the first fenced code block, preferring one tagged python.
/// Replies without a fence are not code.
pub fn extract_code(reply: &str) -> Option<String> {
    let lines: Vec<&str> = reply.lines().collect();
    let mut blocks: Vec<(bool, String)> = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].trim_start();
        if let Some(tag) = line.strip_prefix("```") {
            let tag = tag.trim().to_ascii_lowercase();
            let start = i + 1;
            let mut end = start;
            while end < lines.len() && !lines[end].trim_start().starts_with("```") {
                end += 1;
            }
            let body = lines[start..end.min(lines.len())].join("\n");
            if !body.trim().is_empty() {
                blocks.push((tag == "python" || tag == "py" || tag == "python3", body + "\n"));
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    blocks
        .iter()
        .find(|(py, _)| *py)
        .or_else(|| blocks.first())
        .map(|(_, b)| b.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_extraction() {
        assert_eq!(extract_code("Here:\n```python\nprint(1)\n```\nDone").unwrap(), "print(1)\n");
        assert_eq!(extract_code("```\nx = 1\n```").unwrap(), "x = 1\n");
        assert_eq!(
            extract_code("```text\nnotes\n```\n```py\nprint(2)\n```").unwrap(),
            "print(2)\n"
        );
        assert!(extract_code("I think you should loop over the list.").is_none());
        assert!(extract_code("```python\n```").is_none());
        assert_eq!(extract_code("```python\nprint(3)").unwrap(), "print(3)\n");
    }
}

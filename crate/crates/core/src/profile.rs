//! Learner profile shared by tutoring sessions and simulated students.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Level::Low),
            "medium" => Ok(Level::Medium),
            "high" => Ok(Level::High),
            other => Err(format!("unknown level `{other}` (expected low, medium or high)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub background: String,
    pub goals: String,
    pub self_reported_level: Level,
    #[serde(default)]
    pub preferred_topics: Vec<String>,
}

impl StudentProfile {
    pub fn new(background: impl Into<String>, goals: impl Into<String>, level: Level) -> Self {
        Self {
            background: background.into(),
            goals: goals.into(),
            self_reported_level: level,
            preferred_topics: Vec::new(),
        }
    }

    pub fn with_topics<I, S>(mut self, topics: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.preferred_topics = topics.into_iter().map(Into::into).collect();
        self
    }

    /// Plain-text block used inside agent prompts.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "Background: {}\nGoals: {}\nLevel: {}",
            self.background, self.goals, self.self_reported_level
        );
        if !self.preferred_topics.is_empty() {
            s.push_str(&format!("\nPreferred topics: {}", self.preferred_topics.join(", ")));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_parses_case_insensitively() {
        assert_eq!("HIGH".parse::<Level>().unwrap(), Level::High);
        assert!("expert".parse::<Level>().is_err());
    }

    #[test]
    fn describe_lists_topics() {
        let p = StudentProfile::new("first-year", "learn recursion", Level::Low)
            .with_topics(["recursion"]);
        let d = p.describe();
        assert!(d.contains("first-year") && d.contains("Level: low") && d.contains("recursion"));
    }
}

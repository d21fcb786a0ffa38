//! Rubric rating of learning material.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::llm::{ChatMessage, Gateway, ModelBinding};
use crate::profile::StudentProfile;
use crate::session::LearningMaterial;

/// Role name used for the rating binding.
pub const JUDGE_ROLE: &str = "judge";

const REASK: &str = "Your reply could not be used. Reply again with exactly one line \
IA=<1-5> CC=<1-5> INT=<1-5> PER=<1-5>, using whole numbers from 1 to 5.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityScores {
    pub ia: u8,
    pub cc: u8,
    pub int: u8,
    pub per: u8,
    /// Raw rater replies, in order.
    pub transcript: Vec<String>,
}

/// Parses `IA=4 CC=5 INT=3 PER=4` (any order, separated by whitespace,
/// commas or semicolons). Every dimension must appear with a value in 1..=5.
pub fn parse_rating(text: &str) -> Option<[u8; 4]> {
    let mut scores: [Option<u8>; 4] = [None; 4];
    for token in text.split(|c: char| c.is_whitespace() || c == ',' || c == ';') {
        let Some((key, value)) = token.split_once('=') else { continue };
        let slot = match key.trim().to_ascii_uppercase().as_str() {
            "IA" => 0,
            "CC" => 1,
            "INT" => 2,
            "PER" => 3,
            _ => continue,
        };
        let v: u8 = value.trim().trim_end_matches('.').parse().ok()?;
        if !(1..=5).contains(&v) {
            return None;
        }
        if scores[slot].replace(v).is_some_and(|old| old != v) {
            return None;
        }
    }
    Some([scores[0]?, scores[1]?, scores[2]?, scores[3]?])
}

/// Short content hash of the rubric asset, recorded with every set of scores
/// so ratings from different rubric revisions are not mixed.
pub fn rubric_version() -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(crate::prompts::JUDGE_RUBRIC.as_bytes()))[..12].to_string()
}

pub fn rubric_prompt(material: &LearningMaterial, profile: &StudentProfile) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(crate::prompts::JUDGE_RUBRIC),
        ChatMessage::user(format!(
            "Student profile:\n{}\n\nLearning material:\n{}",
            profile.describe(),
            material.to_markdown()
        )),
    ]
}

/// One rating call; an unusable reply is re-asked once.
pub fn judge_materials(
    gateway: &Gateway,
    binding: &ModelBinding,
    material: &LearningMaterial,
    profile: &StudentProfile,
) -> Result<QualityScores, EvalError> {
    if material.sections.is_empty() {
        return Err(EvalError::Config("material has no sections".into()));
    }
    let mut messages = rubric_prompt(material, profile);
    let mut transcript = Vec::new();
    for attempt in 0..2 {
        let reply = gateway.complete(binding, &messages)?.text;
        transcript.push(reply.clone());
        if let Some([ia, cc, int, per]) = parse_rating(&reply) {
            return Ok(QualityScores { ia, cc, int, per, transcript });
        }
        if attempt == 0 {
            messages.push(ChatMessage::assistant(reply));
            messages.push(ChatMessage::user(REASK));
        }
    }
    Err(EvalError::UnparseableRating(transcript.join(" | ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rating_parser() {
        assert_eq!(parse_rating("IA=4 CC=5 INT=3 PER=4"), Some([4, 5, 3, 4]));
        assert_eq!(parse_rating("per=1, int=2; cc=3 ia=4."), Some([4, 3, 2, 1]));
        assert_eq!(parse_rating("IA=9 CC=5 INT=3 PER=4"), None);
        assert_eq!(parse_rating("IA=4 CC=5 INT=3"), None);
        assert_eq!(parse_rating("IA=four CC=5 INT=3 PER=4"), None);
        assert_eq!(parse_rating("IA=4 IA=2 CC=5 INT=3 PER=4"), None);
        assert_eq!(parse_rating("IA=0 CC=5 INT=3 PER=4"), None);
    }
}

//! Prompt assets. Each prompt is a plain UTF-8 file under `assets/prompts/`,
//! compiled in as the default and overridable from a directory at runtime.

use std::collections::BTreeMap;
use std::path::Path;

pub const PLANNER: &str = include_str!("../assets/prompts/planner.txt");
pub const RESEARCHER: &str = include_str!("../assets/prompts/researcher.txt");
pub const REPORT_ANALYST: &str = include_str!("../assets/prompts/report_analyst.txt");
pub const PROGRAMMER: &str = include_str!("../assets/prompts/programmer.txt");
pub const TUTOR: &str = include_str!("../assets/prompts/tutor.txt");
pub const DEEP_RESEARCH: &str = include_str!("../assets/prompts/deep_research.txt");
pub const JUDGE_RUBRIC: &str = include_str!("../assets/prompts/judge_rubric.txt");
pub const BASELINE_TUTOR: &str = include_str!("../assets/prompts/baseline_tutor.txt");
pub const STUDENT: &str = include_str!("../assets/prompts/student.txt");
pub const STOP_CHECK: &str = include_str!("../assets/prompts/stop_check.txt");

const BUILTIN: &[(&str, &str)] = &[
    ("planner", PLANNER),
    ("researcher", RESEARCHER),
    ("report_analyst", REPORT_ANALYST),
    ("programmer", PROGRAMMER),
    ("tutor", TUTOR),
    ("deep_research", DEEP_RESEARCH),
    ("judge_rubric", JUDGE_RUBRIC),
    ("baseline_tutor", BASELINE_TUTOR),
    ("student", STUDENT),
    ("stop_check", STOP_CHECK),
];

/// Prompt text by name (`<name>.txt`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    prompts: BTreeMap<String, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            prompts: BUILTIN
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl PromptSet {
    /// Built-in prompts with every `<name>.txt` in `dir` layered on top.
    pub fn with_overrides(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::default();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                set.prompts
                    .insert(stem.to_string(), std::fs::read_to_string(&path)?);
            }
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.prompts.get(name).map(String::as_str)
    }
}

//! Bundled mock fixtures for offline runs.
//!
//! A fixture directory holds `llm.json` (a [`MockScript`]) and `corpus/`
//! (crawler corpus files, see [`crate::tools::Crawler`]). The bundled set
//! scripts every agent role, the simulated student, the stop check and the
//! rubric judge over the toy problems.

use std::path::{Path, PathBuf};

use crate::llm::{Gateway, MockProvider, MockScript};
use crate::tools::{write_corpus_entry, CorpusFile, Crawler};

pub const LLM_FILE: &str = "llm.json";
pub const CORPUS_DIR: &str = "corpus";

const BUNDLED_SCRIPT: &str = include_str!("../assets/fixtures/llm.json");
const BUNDLED_CORPUS: &str = include_str!("../assets/fixtures/corpus.json");

/// Every role a full run binds: the five agents plus the baseline tutor,
/// the simulated student, the stop check and the judge.
pub const ALL_ROLES: &[&str] = &[
    "planner",
    "researcher",
    "report_analyst",
    "programmer",
    "tutor",
    "baseline_tutor",
    "student",
    "stop_check",
    "judge",
];

pub fn bundled_script() -> MockScript {
    serde_json::from_str(BUNDLED_SCRIPT).expect("bundled mock script is valid")
}

pub fn bundled_corpus() -> Vec<CorpusFile> {
    serde_json::from_str(BUNDLED_CORPUS).expect("bundled corpus is valid")
}

/// Writes the bundled fixtures into `dir` in the on-disk layout.
pub fn write_bundled(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(LLM_FILE), BUNDLED_SCRIPT)?;
    for file in bundled_corpus() {
        write_corpus_entry(&dir.join(CORPUS_DIR), &file.query, file.results)?;
    }
    Ok(())
}

/// A gateway whose roles are all bound to the mock script in `dir`.
pub fn mock_gateway(dir: &Path) -> Result<Gateway, String> {
    let provider = MockProvider::from_file(&dir.join(LLM_FILE))?;
    Ok(Gateway::mock(provider, ALL_ROLES))
}

pub fn corpus_crawler(dir: &Path) -> Crawler {
    Crawler::offline(PathBuf::from(dir).join(CORPUS_DIR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_load() {
        let dir = tempfile::tempdir().unwrap();
        write_bundled(dir.path()).unwrap();
        let gw = mock_gateway(dir.path()).unwrap();
        gw.validate_roles(ALL_ROLES.iter().copied()).unwrap();
        let crawl = corpus_crawler(dir.path()).crawl("Loops", 5).unwrap();
        assert_eq!(crawl.entries.len(), 2);
        assert!(bundled_script().roles.contains_key("student"));
    }
}

//! Web crawler tool.
//!
//! Offline mode reads a fixture corpus: one JSON file per query, named by the
//! SHA-256 of the normalized query, shaped
//! `{"query": "...", "results": [{"url", "title", "snippet", "text"}]}`.
//! Live mode sends `GET <endpoint>?q=<query>&n=<max>` to a search service that
//! answers with the same shape and ranks the results itself.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub url: String,
    pub title: String,
    pub snippet: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub query: String,
    pub results: Vec<CorpusDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlEntry {
    /// 1-based relevance rank.
    pub rank: usize,
    pub url: String,
    pub title: String,
    pub snippet: String,
    pub fetched_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlResult {
    pub entries: Vec<CrawlEntry>,
}

impl CrawlResult {
    fn from_documents(docs: Vec<CorpusDocument>, max_results: usize) -> Self {
        let entries = docs
            .into_iter()
            .take(max_results)
            .enumerate()
            .map(|(i, d)| CrawlEntry {
                rank: i + 1,
                url: d.url,
                title: d.title,
                snippet: d.snippet,
                fetched_text: d.text,
            })
            .collect();
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_url(&self, url: &str) -> bool {
        self.entries.iter().any(|e| e.url == url)
    }
}

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("query must not be empty")]
    EmptyQuery,
    #[error("max_results must be positive")]
    ZeroResults,
    #[error("network unavailable: {0}")]
    NetworkUnavailable(String),
    #[error("corpus file {path} is malformed: {message}")]
    Corpus { path: String, message: String },
}

/// Lower-cased, trimmed, inner whitespace collapsed.
pub fn normalize_query(query: &str) -> String {
    query
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn corpus_file_name(query: &str) -> String {
    let digest = Sha256::digest(normalize_query(query).as_bytes());
    format!("{}.json", hex::encode(digest))
}

/// Writes a corpus entry for `query` into `dir`.
pub fn write_corpus_entry(
    dir: &Path,
    query: &str,
    results: Vec<CorpusDocument>,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(corpus_file_name(query));
    let file = CorpusFile {
        query: query.to_string(),
        results,
    };
    std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub enum Crawler {
    Offline { corpus_dir: Option<PathBuf> },
    Live { endpoint: String },
}

impl Default for Crawler {
    fn default() -> Self {
        Crawler::Offline { corpus_dir: None }
    }
}

impl Crawler {
    pub fn offline(corpus_dir: impl Into<PathBuf>) -> Self {
        Crawler::Offline {
            corpus_dir: Some(corpus_dir.into()),
        }
    }

    pub fn crawl(&self, query: &str, max_results: usize) -> Result<CrawlResult, CrawlError> {
        if query.trim().is_empty() {
            return Err(CrawlError::EmptyQuery);
        }
        if max_results == 0 {
            return Err(CrawlError::ZeroResults);
        }
        match self {
            Crawler::Offline { corpus_dir: None } => Ok(CrawlResult::default()),
            Crawler::Offline {
                corpus_dir: Some(dir),
            } => {
                let path = dir.join(corpus_file_name(query));
                let raw = match std::fs::read_to_string(&path) {
                    Ok(raw) => raw,
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                        return Ok(CrawlResult::default())
                    }
                    Err(e) => {
                        return Err(CrawlError::Corpus {
                            path: path.display().to_string(),
                            message: e.to_string(),
                        })
                    }
                };
                let file: CorpusFile =
                    serde_json::from_str(&raw).map_err(|e| CrawlError::Corpus {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                Ok(CrawlResult::from_documents(file.results, max_results))
            }
            Crawler::Live { endpoint } => {
                let agent: ureq::Agent = ureq::Agent::config_builder()
                    .timeout_global(Some(Duration::from_secs(30)))
                    .build()
                    .into();
                let mut resp = agent
                    .get(endpoint)
                    .query("q", query)
                    .query("n", max_results.to_string())
                    .call()
                    .map_err(|e| CrawlError::NetworkUnavailable(e.to_string()))?;
                let file: CorpusFile = resp
                    .body_mut()
                    .read_json()
                    .map_err(|e| CrawlError::NetworkUnavailable(e.to_string()))?;
                Ok(CrawlResult::from_documents(file.results, max_results))
            }
        }
    }
}

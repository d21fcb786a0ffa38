#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use codeedu_core::dataset::toy_problems;
use codeedu_core::fixtures;
use codeedu_core::prompts::PromptSet;
use codeedu_core::session::{Engine, EngineConfig};
use codeedu_core::tools::{PythonSandbox, SandboxPolicy};
use codeedu_server::{router, EngineBackend};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

/// An engine over the bundled mock fixtures and the toy problems.
pub fn engine(root: &Path, interpreter: &str, max_turns: usize) -> Engine {
    let fx = root.join("fixtures");
    fixtures::write_bundled(&fx).unwrap();
    let mut config = EngineConfig::new(root.join("root"));
    config.max_turns = max_turns;
    Engine::new(
        config,
        Arc::new(fixtures::mock_gateway(&fx).unwrap()),
        Arc::new(PythonSandbox::new(root.join("scratch")).with_interpreter(interpreter)),
        fixtures::corpus_crawler(&fx),
        SandboxPolicy::default(),
        toy_problems(),
        &PromptSet::default(),
    )
    .unwrap()
}

pub fn app(root: &Path) -> Router {
    router(Arc::new(EngineBackend::new(engine(root, "python3", 20))))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub bytes: Bytes,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| {
            panic!("{e}: {}", String::from_utf8_lossy(&self.bytes))
        })
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply { status, headers, bytes }
}

pub fn intake() -> Value {
    serde_json::json!({
        "background": "first-year student",
        "goals": "learn loops",
        "level": "low",
        "topics": "loops"
    })
}

/// Reads SSE frames from a streaming body until `count` frames arrived or
/// `wait` passes without progress. Returns `(id, event, data)` per frame.
pub async fn read_frames(body: &mut Body, count: usize, wait: Duration) -> Vec<(u64, String, Value)> {
    let mut buf = String::new();
    let mut frames = Vec::new();
    while frames.len() < count {
        let Ok(Some(Ok(frame))) = tokio::time::timeout(wait, body.frame()).await else { break };
        let Ok(data) = frame.into_data() else { continue };
        buf.push_str(&String::from_utf8_lossy(&data));
        while let Some(end) = buf.find("\n\n") {
            let block: String = buf.drain(..end + 2).collect();
            let (mut id, mut event, mut payload) = (None, String::new(), None);
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("id:") {
                    id = v.trim().parse().ok();
                } else if let Some(v) = line.strip_prefix("event:") {
                    event = v.trim().to_string();
                } else if let Some(v) = line.strip_prefix("data:") {
                    payload = serde_json::from_str(v.trim()).ok();
                }
            }
            if let (Some(id), Some(payload)) = (id, payload) {
                frames.push((id, event, payload));
            }
        }
    }
    frames
}

//! HTTP service for tutoring sessions: JSON endpoints for session
//! operations and a resumable server-sent event stream per session.

pub mod api;
pub mod backend;
pub mod config;
pub mod error;

pub use api::{router, SharedBackend};
pub use backend::{Backend, EngineBackend, EventFrame, ExerciseView, MessageReply, PhaseChange, SessionView, StepView};
pub use config::ServerConfig;
pub use error::{ApiError, ErrorCode};

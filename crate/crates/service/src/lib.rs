//! Annotation service: sessions that build a program one operation at a
//! time, a submission gate, 2-of-3 validation voting and annotator trust.
//! All state changes are appended to an event log and can be rebuilt from it.

pub mod config;
mod events;
mod http;
mod platform;

pub use config::{build_platform, ConfigError, ServiceConfig};
pub use events::{Event, EventLog};
pub use http::{router, serve, SharedPlatform};
pub use platform::{
    AnnotatorRecord, GateRejection, HistoryItem, Platform, Resolution, ServiceError, Session, SessionStatus,
    SubmitVerdict, TaskView, ValidArg, ValidationTask, Vote,
};

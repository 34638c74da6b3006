//! Persistence and the sync/query service.
//!
//! Every accepted measurement is one record in an append-only log, together
//! with the z-scores, alerts and score it produced. State is rebuilt from
//! that log alone. Clients generate measurement ids, so resubmitting a batch
//! is harmless: seen ids come back as duplicates and nothing is written.

mod formats;
pub mod http;
mod layers;
mod log;
mod registry;
mod service;
mod store;

pub use formats::{ChildRow, ChwRow, MeasurementRow};
pub use layers::{compute_layers, latest_cases, prevalence, LayerKind, Layers, CASE_THRESHOLD};
pub use log::{decode, encode, LogRecord, RecordLog, MAGIC, VERSION};
pub use registry::{Child, Chw, Registry};
pub use service::{sync_batches, AlertFilter, Platform, QuestView, Role, SyncBatch, SyncResponse};
pub use store::{AcceptedQuest, Env, RejectReason, Store, StoredMeasurement, SyncOutcome};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlatformError {
    #[error("unauthorized")]
    Unauthorized,
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("log: {0}")]
    Log(String),
}

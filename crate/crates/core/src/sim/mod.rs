//! Deterministic discrete-event simulation of named-data retrieval between
//! servers, road-side units and vehicles.

mod category;
pub mod config;
mod engine;
pub mod store;

pub use category::{dispatch_protection, DataCategory, Protection, QossLevel, QossProfile};
pub use config::{fixed_line, Action, ConfigError, NodeKind, ScenarioConfig, Scheduled};
pub use engine::{
    replay, run_scenario, EventLog, InterestRecord, LogRecord, Metrics, NotFoundReason, Outcome,
    ReplayError, RequestSummary, SimOutput, Simulation,
};

//! Line-delimited JSON session protocol.
//!
//! Every line is one [`WireMessage`] tagged by `type`. Clients send
//! `hand_sample` and `command` frames; the server answers each with
//! `feedback`, `summary` or `error` frames.

mod engine;
mod library;
mod log;
mod throttle;
mod wire;

pub use engine::{EngineConfig, ProtocolSession};
pub use library::{load_trajectory, save_trajectory, TrajectoryFileError, TrajectoryLibrary};
pub use log::{read_log, replay_session, session_ids, write_log, LogDirection, LogError, ReplayOutcome, SessionLogRecord};
pub use throttle::Throttle;
pub use wire::{FeedbackFrame, SummaryFrame, TunnelInfo, WireCommand, WireMessage};

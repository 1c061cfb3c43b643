use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::engine::ProtocolSession;
use super::wire::WireMessage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogDirection {
    In,
    Out,
}

/// One line of a session log: a message seen or sent by the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLogRecord {
    pub session: u64,
    pub seq: u64,
    pub dir: LogDirection,
    /// Server clock when the record was written (simulation time for
    /// simulated sessions).
    pub ts_ms: f64,
    pub msg: WireMessage,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<SessionLogRecord>, LogError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_log<W: Write>(records: &[SessionLogRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Ids of the sessions in a log, in order of first appearance.
pub fn session_ids(records: &[SessionLogRecord]) -> Vec<u64> {
    let mut ids: Vec<u64> = Vec::new();
    for r in records {
        if !ids.contains(&r.session) {
            ids.push(r.session);
        }
    }
    ids
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    /// Engine state after every inbound message has been fed.
    pub engine: ProtocolSession,
    /// Outbound messages the engine produced, serialized.
    pub produced: Vec<String>,
    /// Outbound messages found in the log, serialized.
    pub recorded: Vec<String>,
}

impl ReplayOutcome {
    pub fn matches(&self) -> bool {
        self.produced == self.recorded
    }

    /// Index of the first outbound message that differs.
    pub fn first_mismatch(&self) -> Option<usize> {
        let n = self.produced.len().max(self.recorded.len());
        (0..n).find(|&i| self.produced.get(i) != self.recorded.get(i))
    }
}

/// Feeds the inbound half of one session's records through `engine` and
/// pairs what it sends with what the log recorded. Timestamps take no part.
pub fn replay_session(records: &[SessionLogRecord], session: u64, mut engine: ProtocolSession) -> ReplayOutcome {
    let mut produced = Vec::new();
    let mut recorded = Vec::new();
    for r in records.iter().filter(|r| r.session == session) {
        match r.dir {
            LogDirection::In => produced.extend(engine.handle(r.msg.clone()).iter().map(WireMessage::to_line)),
            LogDirection::Out => recorded.push(r.msg.to_line()),
        }
    }
    ReplayOutcome { engine, produced, recorded }
}

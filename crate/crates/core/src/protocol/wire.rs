use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytics::ErrorSummary;
use crate::feedback::{FeedbackMode, FeedbackUpdate, Phase, SessionSummary, SphereUpdate};
use crate::geometry::{ConfidenceInterval, Vec3};
use crate::labels::SessionLabels;

/// One line of the session protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    HandSample { t_ms: f64, pos_m: Vec3 },
    Command(WireCommand),
    Feedback(FeedbackFrame),
    Summary(Box<SummaryFrame>),
    Error { code: String, message: String },
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::HandSample { .. } => "hand_sample",
            WireMessage::Command(_) => "command",
            WireMessage::Feedback(_) => "feedback",
            WireMessage::Summary(_) => "summary",
            WireMessage::Error { .. } => "error",
        }
    }

    pub fn error(code: impl Into<String>, message: impl Into<String>) -> Self {
        WireMessage::Error {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }

    /// Parses one line. Failures come back as the error frame to send.
    pub fn parse_line(line: &str) -> Result<Self, WireMessage> {
        match serde_json::from_str::<WireMessage>(line) {
            Ok(m) => Ok(m),
            Err(e) => {
                let kind = serde_json::from_str::<Value>(line)
                    .ok()
                    .and_then(|v| v.get("type").and_then(Value::as_str).map(str::to_owned));
                Err(match kind {
                    Some(t) if !KNOWN_TYPES.contains(&t.as_str()) => {
                        WireMessage::error("UnknownType", format!("unknown message type `{t}`"))
                    }
                    _ => WireMessage::error("Malformed", e.to_string()),
                })
            }
        }
    }
}

const KNOWN_TYPES: [&str; 5] = ["hand_sample", "command", "feedback", "summary", "error"];

/// Therapist-side command, framed as `{"action": ..., "args": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCommand", into = "RawCommand")]
pub enum WireCommand {
    Calibrate { point_m: Vec3 },
    SelectTrajectory { id: String },
    PlaceMove { dx: f64, dy: f64, dz: f64 },
    SetCi { ci: ConfidenceInterval },
    SetMode { mode: FeedbackMode },
    Start,
    Stop,
    ResetTunnel,
    SetLabels(SessionLabels),
}

impl WireCommand {
    pub fn action(&self) -> &'static str {
        match self {
            WireCommand::Calibrate { .. } => "calibrate",
            WireCommand::SelectTrajectory { .. } => "select_trajectory",
            WireCommand::PlaceMove { .. } => "place_move",
            WireCommand::SetCi { .. } => "set_ci",
            WireCommand::SetMode { .. } => "set_mode",
            WireCommand::Start => "start",
            WireCommand::Stop => "stop",
            WireCommand::ResetTunnel => "reset_tunnel",
            WireCommand::SetLabels(_) => "set_labels",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCommand {
    action: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    args: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrateArgs {
    point_m: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectArgs {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceMoveArgs {
    #[serde(default)]
    dx: f64,
    #[serde(default)]
    dy: f64,
    #[serde(default)]
    dz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CiArgs {
    ci: ConfidenceInterval,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeArgs {
    mode: FeedbackMode,
}

fn args<T: serde::de::DeserializeOwned>(action: &str, v: Value) -> Result<T, String> {
    serde_json::from_value(v).map_err(|e| format!("bad args for `{action}`: {e}"))
}

fn no_args(action: &str, v: &Value) -> Result<(), String> {
    match v {
        Value::Null => Ok(()),
        Value::Object(m) if m.is_empty() => Ok(()),
        _ => Err(format!("`{action}` takes no args")),
    }
}

impl TryFrom<RawCommand> for WireCommand {
    type Error = String;

    fn try_from(raw: RawCommand) -> Result<Self, String> {
        let a = raw.action.as_str();
        Ok(match a {
            "calibrate" => {
                let CalibrateArgs { point_m } = args(a, raw.args)?;
                WireCommand::Calibrate { point_m }
            }
            "select_trajectory" => {
                let SelectArgs { id } = args(a, raw.args)?;
                WireCommand::SelectTrajectory { id }
            }
            "place_move" => {
                let PlaceMoveArgs { dx, dy, dz } = args(a, raw.args)?;
                WireCommand::PlaceMove { dx, dy, dz }
            }
            "set_ci" => {
                let CiArgs { ci } = args(a, raw.args)?;
                WireCommand::SetCi { ci }
            }
            "set_mode" => {
                let ModeArgs { mode } = args(a, raw.args)?;
                WireCommand::SetMode { mode }
            }
            "set_labels" => WireCommand::SetLabels(args(a, raw.args)?),
            "start" | "stop" | "reset_tunnel" => {
                no_args(a, &raw.args)?;
                match a {
                    "start" => WireCommand::Start,
                    "stop" => WireCommand::Stop,
                    _ => WireCommand::ResetTunnel,
                }
            }
            other => return Err(format!("unknown action `{other}`")),
        })
    }
}

impl From<WireCommand> for RawCommand {
    fn from(c: WireCommand) -> Self {
        let action = c.action().to_string();
        let args = match c {
            WireCommand::Calibrate { point_m } => serde_json::json!({ "point_m": point_m }),
            WireCommand::SelectTrajectory { id } => serde_json::json!({ "id": id }),
            WireCommand::PlaceMove { dx, dy, dz } => serde_json::json!({ "dx": dx, "dy": dy, "dz": dz }),
            WireCommand::SetCi { ci } => serde_json::json!({ "ci": ci }),
            WireCommand::SetMode { mode } => serde_json::json!({ "mode": mode }),
            WireCommand::SetLabels(l) => serde_json::to_value(l).expect("labels serialize"),
            WireCommand::Start | WireCommand::Stop | WireCommand::ResetTunnel => Value::Null,
        };
        RawCommand { action, args }
    }
}

/// Geometry of the tunnel as placed, for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelInfo {
    pub trajectory_id: String,
    pub diameter_m: f64,
    pub mode: FeedbackMode,
    pub via_points_m: Vec<Vec3>,
}

/// Server-to-client feedback: either the scoring of one hand sample or the
/// acknowledgement of a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackFrame {
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ack: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ms: Option<f64>,
    #[serde(default)]
    pub changed: Vec<SphereUpdate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_error_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_point_m: Option<Vec3>,
    #[serde(default)]
    pub repetition: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tunnel: Option<TunnelInfo>,
}

impl FeedbackFrame {
    pub fn from_update(u: FeedbackUpdate, phase: Phase) -> Self {
        Self {
            phase,
            ack: None,
            t_ms: Some(u.t_ms),
            changed: u.changed,
            current_error_m: Some(u.current_error),
            nearest_index: Some(u.nearest_index),
            path_point_m: Some(u.path_point),
            repetition: u.repetition,
            tunnel: None,
        }
    }

    pub fn ack(action: &str, phase: Phase, repetition: u32) -> Self {
        Self {
            phase,
            ack: Some(action.to_string()),
            t_ms: None,
            changed: Vec::new(),
            current_error_m: None,
            nearest_index: None,
            path_point_m: None,
            repetition,
            tunnel: None,
        }
    }

    /// The scored-sample view, when this frame answers a hand sample.
    pub fn update(&self) -> Option<FeedbackUpdate> {
        Some(FeedbackUpdate {
            t_ms: self.t_ms?,
            changed: self.changed.clone(),
            current_error: self.current_error_m?,
            nearest_index: self.nearest_index?,
            path_point: self.path_point_m?,
            repetition: self.repetition,
        })
    }
}

/// End-of-task report: the live session summary (including the tracked path
/// for the path-line rendering) and, when the path splits into the expected
/// repetitions, the end-effector error summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFrame {
    pub session: SessionSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_summary: Option<ErrorSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_sample_layout() {
        let m = WireMessage::HandSample { t_ms: 16.5, pos_m: Vec3::new(0.1, 0.0, -0.25) };
        assert_eq!(m.to_line(), r#"{"type":"hand_sample","t_ms":16.5,"pos_m":[0.1,0.0,-0.25]}"#);
        assert_eq!(WireMessage::parse_line(&m.to_line()).unwrap(), m);
    }

    #[test]
    fn command_layout() {
        let m = WireMessage::Command(WireCommand::SetCi { ci: ConfidenceInterval::C2 });
        assert_eq!(m.to_line(), r#"{"type":"command","action":"set_ci","args":{"ci":"C2"}}"#);
        let start = WireMessage::Command(WireCommand::Start);
        assert_eq!(start.to_line(), r#"{"type":"command","action":"start"}"#);
        for line in [r#"{"type":"command","action":"start","args":{}}"#, r#"{"type":"command","action":"start"}"#] {
            assert_eq!(WireMessage::parse_line(line).unwrap(), start);
        }
    }

    #[test]
    fn place_move_defaults_missing_axes() {
        let m = WireMessage::parse_line(r#"{"type":"command","action":"place_move","args":{"dx":0.1}}"#).unwrap();
        assert_eq!(m, WireMessage::Command(WireCommand::PlaceMove { dx: 0.1, dy: 0.0, dz: 0.0 }));
    }

    #[test]
    fn unknown_type_and_garbage() {
        let e = WireMessage::parse_line(r#"{"type":"teleport"}"#).unwrap_err();
        assert!(matches!(e, WireMessage::Error { ref code, .. } if code == "UnknownType"));
        let e = WireMessage::parse_line("not json").unwrap_err();
        assert!(matches!(e, WireMessage::Error { ref code, .. } if code == "Malformed"));
        let e = WireMessage::parse_line(r#"{"type":"command","action":"fly"}"#).unwrap_err();
        assert!(matches!(e, WireMessage::Error { ref code, ref message } if code == "Malformed" && message.contains("fly")));
    }
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::library::TrajectoryLibrary;
use super::wire::{FeedbackFrame, SummaryFrame, TunnelInfo, WireCommand, WireMessage};
use crate::analytics::{analyze_path, AnalysisConfig, Space};
use crate::arm::ArmGeometry;
use crate::feedback::{Command, CommandOutcome, HandSample, Session, SessionConfig, SessionError};
use crate::geometry::Direction;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub session: SessionConfig,
    pub analysis: AnalysisConfig,
    pub arm: ArmGeometry,
}

/// One client's session behind the wire protocol.
///
/// Hand samples arrive in world coordinates and are mapped into the
/// calibrated frame before scoring. Every inbound message yields the frames
/// to send back, in order.
#[derive(Debug, Clone)]
pub struct ProtocolSession {
    session: Session,
    library: Arc<TrajectoryLibrary>,
    config: EngineConfig,
}

impl ProtocolSession {
    pub fn new(library: Arc<TrajectoryLibrary>, config: EngineConfig) -> Self {
        Self {
            session: Session::new(config.session),
            library,
            config,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn handle_line(&mut self, line: &str) -> Vec<WireMessage> {
        match WireMessage::parse_line(line) {
            Ok(m) => self.handle(m),
            Err(e) => vec![e],
        }
    }

    pub fn handle(&mut self, msg: WireMessage) -> Vec<WireMessage> {
        match msg {
            WireMessage::HandSample { t_ms, pos_m } => self.sample(t_ms, pos_m),
            WireMessage::Command(c) => self.command(c),
            other => vec![WireMessage::error(
                "UnexpectedType",
                format!("`{}` frames are server-to-client only", other.kind()),
            )],
        }
    }

    fn sample(&mut self, t_ms: f64, world: crate::Vec3) -> Vec<WireMessage> {
        let local = match self.session.frame() {
            Some(f) => f.transform(world, Direction::WorldToLocal),
            None => world,
        };
        match self.session.process_sample(HandSample::new(t_ms, local)) {
            Ok(u) => vec![WireMessage::Feedback(FeedbackFrame::from_update(u, self.session.phase()))],
            Err(e) => vec![session_error(&e)],
        }
    }

    fn command(&mut self, c: WireCommand) -> Vec<WireMessage> {
        let action = c.action();
        let cmd = match c {
            WireCommand::Calibrate { point_m } => Command::Calibrate(point_m),
            WireCommand::SelectTrajectory { id } => match self.library.get(&id) {
                Some(t) => Command::SelectTrajectory(t.clone()),
                None => {
                    return vec![WireMessage::error("UnknownTrajectory", format!("no trajectory with id `{id}`"))]
                }
            },
            WireCommand::PlaceMove { dx, dy, dz } => Command::PlaceMove { dx, dy, dz },
            WireCommand::SetCi { ci } => Command::SetCi(ci),
            WireCommand::SetMode { mode } => Command::SetMode(mode),
            WireCommand::Start => Command::Start,
            WireCommand::Stop => Command::Stop,
            WireCommand::ResetTunnel => Command::ResetTunnel,
            WireCommand::SetLabels(l) => Command::SetLabels(l),
        };
        let shows_tunnel = matches!(
            cmd,
            Command::SelectTrajectory(_)
                | Command::PlaceMove { .. }
                | Command::SetCi(_)
                | Command::SetMode(_)
                | Command::Start
        );
        let outcome = match self.session.apply_command(cmd) {
            Ok(o) => o,
            Err(e) => return vec![session_error(&e)],
        };
        let mut ack = FeedbackFrame::ack(action, self.session.phase(), self.session.repetition_count());
        if shows_tunnel {
            ack.tunnel = self.tunnel_info();
        }
        match outcome {
            CommandOutcome::Ack => vec![WireMessage::Feedback(ack)],
            CommandOutcome::TunnelPainted(changed) => {
                ack.changed = changed;
                vec![WireMessage::Feedback(ack)]
            }
            CommandOutcome::Stopped(summary) => {
                let analysis = self.session.placed_trajectory().map(|traj| {
                    analyze_path(
                        &summary.tracked_path,
                        &traj,
                        Space::EndEffector,
                        &self.config.arm,
                        &self.config.analysis,
                        &summary.labels,
                    )
                });
                let (error_summary, analysis_error) = match analysis {
                    Some(Ok(s)) => (Some(s), None),
                    Some(Err(e)) => (None, Some(e.to_string())),
                    None => (None, None),
                };
                vec![
                    WireMessage::Feedback(ack),
                    WireMessage::Summary(Box::new(SummaryFrame {
                        session: *summary,
                        error_summary,
                        analysis_error,
                    })),
                ]
            }
        }
    }

    fn tunnel_info(&self) -> Option<TunnelInfo> {
        let placed = self.session.placed_trajectory()?;
        Some(TunnelInfo {
            trajectory_id: placed.id,
            diameter_m: self.session.ci().diameter(),
            mode: self.session.mode(),
            via_points_m: placed.via_points,
        })
    }
}

fn session_error(e: &SessionError) -> WireMessage {
    WireMessage::error(e.code(), e.to_string())
}

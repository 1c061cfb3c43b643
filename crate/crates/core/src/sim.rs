//! Seeded synthetic hand streams.
//!
//! The hand moves at constant speed along one repetition path per cycle.
//! Two perturbations are added on top: a constant bias, and a 3-D
//! Ornstein-Uhlenbeck wander. The wander fades out near the points the hand
//! touches (the start, and the far end of an open path), so endpoints are
//! reached exactly up to the bias. In closed loop the hand also carries a
//! correction term that is pulled toward the tunnel centerline whenever the
//! live feedback reports an error above a deadband.
//!
//! Every run drives a real session through protocol frames, so the log it
//! returns can be replayed or analyzed like a recorded one.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arm::{solve_path, ArmGeometry, JointVector, PathIkError, DEFAULT_SEED};
use crate::feedback::{FeedbackUpdate, HandSample, SessionSummary};
use crate::geometry::polyline::{sample_uniform, ArcParam};
use crate::geometry::{ExerciseId, Trajectory, Vec3};
use crate::labels::{Condition, SessionLabels};
use crate::protocol::{
    EngineConfig, LogDirection, ProtocolSession, SessionLogRecord, TrajectoryLibrary, WireCommand,
    WireMessage,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub bias: Vec3,
    /// Stationary standard deviation of the wander, per axis, meters.
    pub wander_sd: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            bias: Vec3::ZERO,
            wander_sd: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub exercise: ExerciseId,
    pub condition: Condition,
    /// Seconds per repetition.
    pub cycle_time_s: f64,
    pub noise: NoiseConfig,
    pub repetitions: usize,
    pub sample_rate_hz: f64,
    /// Mean-reversion rate of the wander, 1/s.
    pub theta: f64,
    /// Closed-loop deadband as a fraction of the tunnel radius.
    pub deadband: f64,
    pub subject: Option<String>,
}

impl SimConfig {
    pub fn new(exercise: ExerciseId, condition: Condition) -> Self {
        Self {
            exercise,
            condition,
            cycle_time_s: default_cycle_time(condition),
            noise: NoiseConfig::default(),
            repetitions: 5,
            sample_rate_hz: 60.0,
            theta: 1.0,
            deadband: 0.2,
            subject: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.noise.seed = seed;
        self
    }

    /// Samples per repetition, rounded to an even count.
    pub fn samples_per_rep(&self) -> usize {
        (((self.cycle_time_s * self.sample_rate_hz) / 2.0).round() as usize * 2).max(2)
    }

    fn validate(&self) -> Result<(), SimError> {
        let ok = self.cycle_time_s > 0.0
            && self.sample_rate_hz > 0.0
            && self.repetitions > 0
            && self.theta > 0.0
            && self.noise.wander_sd >= 0.0
            && self.deadband >= 0.0
            && self.noise.bias.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig)
        }
    }
}

/// Mean cycle times observed per condition; the no-feedback arm reuses the
/// widest tunnel's time.
pub fn default_cycle_time(condition: Condition) -> f64 {
    match condition {
        Condition::NoFeedback | Condition::C1 => 4.69,
        Condition::C2 => 4.99,
        Condition::C3 => 6.07,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("open loop runs only the no-feedback condition")]
    OpenLoopNeedsNoFeedback,
    #[error("closed loop needs a tunnel condition (c1, c2 or c3)")]
    ClosedLoopNeedsTunnel,
    #[error("simulation parameters must be positive and finite")]
    InvalidConfig,
    #[error("session rejected a frame: {code}: {message}")]
    Protocol { code: String, message: String },
}

/// Everything one simulated session produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub log: Vec<SessionLogRecord>,
    pub summary: SessionSummary,
    /// The trajectory as placed in the session, local frame.
    pub trajectory: Trajectory,
}

impl SimRun {
    pub fn path(&self) -> &[HandSample] {
        &self.summary.tracked_path
    }
}

/// Hand following the path with only the endpoints as references.
pub fn run_open_loop(cfg: &SimConfig, traj: &Trajectory) -> Result<SimRun, SimError> {
    if cfg.condition != Condition::NoFeedback {
        return Err(SimError::OpenLoopNeedsNoFeedback);
    }
    run(cfg, traj, None)
}

/// Hand steered by the live feedback with correction rate `gain` (1/s).
pub fn run_closed_loop(cfg: &SimConfig, traj: &Trajectory, gain: f64) -> Result<SimRun, SimError> {
    if cfg.condition == Condition::NoFeedback {
        return Err(SimError::ClosedLoopNeedsTunnel);
    }
    if !(gain >= 0.0 && gain.is_finite()) {
        return Err(SimError::InvalidConfig);
    }
    run(cfg, traj, Some(gain))
}

struct Driver {
    engine: ProtocolSession,
    log: Vec<SessionLogRecord>,
}

impl Driver {
    fn send(&mut self, ts_ms: f64, msg: WireMessage) -> Result<Vec<WireMessage>, SimError> {
        let replies = self.engine.handle(msg.clone());
        self.record(ts_ms, LogDirection::In, msg);
        for r in &replies {
            if let WireMessage::Error { code, message } = r {
                return Err(SimError::Protocol {
                    code: code.clone(),
                    message: message.clone(),
                });
            }
            self.record(ts_ms, LogDirection::Out, r.clone());
        }
        Ok(replies)
    }

    fn command(&mut self, ts_ms: f64, c: WireCommand) -> Result<Vec<WireMessage>, SimError> {
        self.send(ts_ms, WireMessage::Command(c))
    }

    fn record(&mut self, ts_ms: f64, dir: LogDirection, msg: WireMessage) {
        let seq = self.log.len() as u64;
        self.log.push(SessionLogRecord {
            session: 0,
            seq,
            dir,
            ts_ms,
            msg,
        });
    }
}

/// Fraction of a stroke over which the wander fades in and out around the
/// touched endpoints.
const FADE: f64 = 0.1;

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Wander weight at a phase in `[0, 1)` of a repetition.
fn wander_envelope(phase: f64, closed: bool) -> f64 {
    let touch = if closed {
        phase.min(1.0 - phase)
    } else {
        phase.min((phase - 0.5).abs()).min(1.0 - phase)
    };
    smoothstep(touch / FADE)
}

/// Closest point to `p` on the centerline segments next to via-point `k`.
fn centerline_point(via: &[Vec3], k: usize, p: Vec3) -> Vec3 {
    let mut best = via[k];
    let mut best_d = p.distance_squared(best);
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(via.len() - 1);
    for (a, b) in [(via[lo], via[k]), (via[k], via[hi])] {
        let ab = b - a;
        let len2 = ab.norm_squared();
        if len2 == 0.0 {
            continue;
        }
        let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
        let q = a + ab * t;
        let d = p.distance_squared(q);
        if d < best_d {
            best = q;
            best_d = d;
        }
    }
    best
}

fn run(cfg: &SimConfig, traj: &Trajectory, gain: Option<f64>) -> Result<SimRun, SimError> {
    cfg.validate()?;
    let mut library = TrajectoryLibrary::default();
    library.insert(traj.clone());
    let mut d = Driver {
        engine: ProtocolSession::new(Arc::new(library), EngineConfig::default()),
        log: Vec::new(),
    };

    // identity calibration: world and local frames coincide
    for p in [Vec3::ZERO, Vec3::X, Vec3::Y] {
        d.command(0.0, WireCommand::Calibrate { point_m: p })?;
    }
    d.command(
        0.0,
        WireCommand::SetLabels(SessionLabels {
            subject: cfg.subject.clone(),
            exercise: Some(cfg.exercise),
            condition: Some(cfg.condition),
        }),
    )?;
    d.command(0.0, WireCommand::SelectTrajectory { id: traj.id.clone() })?;
    let ci = cfg.condition.ci().unwrap_or(crate::geometry::ConfidenceInterval::C1);
    d.command(0.0, WireCommand::SetCi { ci })?;
    d.command(0.0, WireCommand::Start)?;

    let rep_path = traj.repetition_path();
    let param = ArcParam::new(&rep_path);
    let closed = traj.is_closed();
    let n = cfg.samples_per_rep();
    let dt = 1.0 / cfg.sample_rate_hz;
    let decay = (-cfg.theta * dt).exp();
    let kick = cfg.noise.wander_sd * (1.0 - decay * decay).sqrt();
    let deadband = cfg.deadband * ci.radius();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let mut wander = Vec3::ZERO;
    let mut correction = Vec3::ZERO;
    let mut t_ms = 0.0;

    for k in 0..=cfg.repetitions * n {
        t_ms = k as f64 * 1000.0 * dt;
        if k > 0 {
            let z: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            wander = wander * decay + Vec3::from(z) * kick;
        }
        let phase = (k % n) as f64 / n as f64;
        let base = param.at(phase * param.length());
        let hand = base + cfg.noise.bias + wander * wander_envelope(phase, closed) + correction;

        let replies = d.send(t_ms, WireMessage::HandSample { t_ms, pos_m: hand })?;
        if let Some(g) = gain {
            if let Some(u) = feedback_of(&replies) {
                if u.current_error > deadband {
                    let target = centerline_point(&traj.via_points, u.nearest_index, hand);
                    correction += (target - hand) * (g * dt).min(1.0);
                }
            }
        }
    }

    let replies = d.command(t_ms, WireCommand::Stop)?;
    let summary = replies
        .into_iter()
        .find_map(|m| match m {
            WireMessage::Summary(s) => Some(s.session),
            _ => None,
        })
        .expect("stop always answers with a summary");
    Ok(SimRun {
        log: d.log,
        summary,
        trajectory: traj.clone(),
    })
}

fn feedback_of(replies: &[WireMessage]) -> Option<FeedbackUpdate> {
    replies.iter().find_map(|m| match m {
        WireMessage::Feedback(f) => f.update(),
        _ => None,
    })
}

/// Joint-space view of a hand log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLog {
    /// `(t_ms, joints)` per hand sample.
    pub actual: Vec<(f64, JointVector)>,
    /// Joints along one desired repetition, `samples` uniformly spaced in
    /// arc length.
    pub desired: Vec<JointVector>,
}

/// Maps a hand log through inverse kinematics, each sample seeded with the
/// previous solution. An unreachable sample is reported with its index.
pub fn to_joint_log(
    path: &[HandSample],
    traj: &Trajectory,
    g: &ArmGeometry,
    samples: usize,
) -> Result<JointLog, PathIkError> {
    let positions: Vec<Vec3> = path.iter().map(|s| s.pos).collect();
    let joints = solve_path(g, &positions, &DEFAULT_SEED)?;
    let desired = solve_path(g, &sample_uniform(&traj.repetition_path(), samples), &DEFAULT_SEED)?;
    Ok(JointLog {
        actual: path.iter().map(|s| s.t_ms).zip(joints).collect(),
        desired,
    })
}

//! Live session state machine.
//!
//! Phases run `Calibrating -> Selecting -> Executing -> Stopped`. Hand
//! samples handed to [`Session::process_sample`] are expressed in the local
//! (calibrated) frame.

use serde::{Deserialize, Serialize};

use super::look::{FeedbackConfig, SphereLook};
use super::spatial::SpatialIndex;
use crate::geometry::{ConfidenceInterval, Frame, GeometryError, Trajectory, Vec3};
use crate::labels::SessionLabels;

/// One tracked hand-centroid position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandSample {
    pub t_ms: f64,
    #[serde(rename = "pos_m")]
    pub pos: Vec3,
}

impl HandSample {
    pub fn new(t_ms: f64, pos: Vec3) -> Self {
        Self { t_ms, pos }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Calibrating,
    Selecting,
    Executing,
    Stopped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// Spheres keep their best error for the whole task.
    #[default]
    Overwrite,
    /// Spheres return to red at every repetition boundary.
    ResetPerRep,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Calibrate(Vec3),
    SelectTrajectory(Trajectory),
    /// In-plane translation; `dz` is accepted and ignored.
    PlaceMove { dx: f64, dy: f64, dz: f64 },
    SetCi(ConfidenceInterval),
    SetMode(FeedbackMode),
    Start,
    Stop,
    ResetTunnel,
    SetLabels(SessionLabels),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Calibrate(_) => "calibrate",
            Command::SelectTrajectory(_) => "select_trajectory",
            Command::PlaceMove { .. } => "place_move",
            Command::SetCi(_) => "set_ci",
            Command::SetMode(_) => "set_mode",
            Command::Start => "start",
            Command::Stop => "stop",
            Command::ResetTunnel => "reset_tunnel",
            Command::SetLabels(_) => "set_labels",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("`{command}` is not allowed while {phase:?}")]
    WrongPhase { command: String, phase: Phase },
    #[error("sample time {t_ms} ms precedes previous sample at {last_ms} ms")]
    NonMonotonicTime { t_ms: f64, last_ms: f64 },
    #[error("no trajectory selected")]
    NoTrajectory,
    #[error("non-finite sample")]
    NonFiniteSample,
    #[error(transparent)]
    Calibration(#[from] GeometryError),
}

impl SessionError {
    /// Stable machine-readable code for protocol error frames.
    pub fn code(&self) -> &'static str {
        match self {
            Self::WrongPhase { .. } => "WrongPhase",
            Self::NonMonotonicTime { .. } => "NonMonotonicTime",
            Self::NoTrajectory => "NoTrajectory",
            Self::NonFiniteSample => "NonFiniteSample",
            Self::Calibration(GeometryError::CollinearPoints { .. }) => "CollinearPoints",
            Self::Calibration(GeometryError::CoincidentPoints) => "CoincidentPoints",
            Self::Calibration(_) => "CalibrationFailed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub feedback: FeedbackConfig,
    /// Radius of the sphere around the start point used for repetition
    /// boundaries.
    pub start_radius_m: f64,
    /// Excursions from the start sphere shorter than this are jitter.
    pub debounce_ms: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            feedback: FeedbackConfig::default(),
            start_radius_m: 0.03,
            debounce_ms: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereUpdate {
    pub index: usize,
    pub scale: f64,
    pub color: super::look::Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereState {
    pub best_error: f64,
    pub look: SphereLook,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelState {
    pub spheres: Vec<SphereState>,
    pub mode: FeedbackMode,
}

impl TunnelState {
    fn painted(n: usize, mode: FeedbackMode, idle: SphereLook) -> Self {
        Self {
            spheres: vec![
                SphereState {
                    best_error: f64::INFINITY,
                    look: idle,
                };
                n
            ],
            mode,
        }
    }

    fn updates(&self) -> Vec<SphereUpdate> {
        self.spheres
            .iter()
            .enumerate()
            .map(|(index, s)| SphereUpdate {
                index,
                scale: s.look.scale,
                color: s.look.color,
            })
            .collect()
    }
}

/// Result of scoring one hand sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackUpdate {
    pub t_ms: f64,
    /// Spheres whose look changed with this sample.
    pub changed: Vec<SphereUpdate>,
    #[serde(rename = "current_error_m")]
    pub current_error: f64,
    pub nearest_index: usize,
    #[serde(rename = "path_point_m")]
    pub path_point: Vec3,
    pub repetition: u32,
}

/// Final state emitted on `Stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub trajectory_id: String,
    pub ci: ConfidenceInterval,
    pub mode: FeedbackMode,
    pub labels: SessionLabels,
    pub repetitions: u32,
    pub samples: usize,
    /// Mean live nearest-via-point error over all samples.
    pub mean_error_m: f64,
    /// Best error per sphere; `None` for spheres never nearest to the hand.
    pub best_errors_m: Vec<Option<f64>>,
    pub tracked_path: Vec<HandSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandOutcome {
    Ack,
    /// Whole tunnel repainted (after `Start` or `ResetTunnel`).
    TunnelPainted(Vec<SphereUpdate>),
    Stopped(Box<SessionSummary>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct RepetitionTracker {
    excursion_start: Option<f64>,
}

impl RepetitionTracker {
    /// Feeds one sample; true on a completed repetition (re-entry after an
    /// excursion lasting at least `debounce_ms`).
    fn step(&mut self, t_ms: f64, inside: bool, debounce_ms: f64) -> bool {
        match (inside, self.excursion_start) {
            (false, None) => {
                self.excursion_start = Some(t_ms);
                false
            }
            (true, Some(t0)) => {
                self.excursion_start = None;
                t_ms - t0 >= debounce_ms
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    config: SessionConfig,
    phase: Phase,
    calibration_points: Vec<Vec3>,
    frame: Option<Frame>,
    trajectory: Option<Trajectory>,
    offset: Vec3,
    ci: ConfidenceInterval,
    mode: FeedbackMode,
    labels: SessionLabels,
    placed: Option<Trajectory>,
    index: Option<SpatialIndex>,
    tunnel: TunnelState,
    tracked_path: Vec<HandSample>,
    error_sum: f64,
    repetition_count: u32,
    tracker: RepetitionTracker,
}

impl Default for Session {
    fn default() -> Self {
        Self::new(SessionConfig::default())
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Self {
        Self {
            config,
            phase: Phase::Calibrating,
            calibration_points: Vec::new(),
            frame: None,
            trajectory: None,
            offset: Vec3::ZERO,
            ci: ConfidenceInterval::C1,
            mode: FeedbackMode::Overwrite,
            labels: SessionLabels::default(),
            placed: None,
            index: None,
            tunnel: TunnelState::painted(0, FeedbackMode::Overwrite, config.feedback.idle()),
            tracked_path: Vec::new(),
            error_sum: 0.0,
            repetition_count: 0,
            tracker: RepetitionTracker::default(),
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn frame(&self) -> Option<&Frame> {
        self.frame.as_ref()
    }

    pub fn ci(&self) -> ConfidenceInterval {
        self.ci
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn labels(&self) -> &SessionLabels {
        &self.labels
    }

    pub fn offset(&self) -> Vec3 {
        self.offset
    }

    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.trajectory.as_ref()
    }

    /// Selected trajectory with the Place/Move offset applied.
    pub fn placed_trajectory(&self) -> Option<Trajectory> {
        self.trajectory.as_ref().map(|t| t.translated(self.offset))
    }

    pub fn tunnel(&self) -> &TunnelState {
        &self.tunnel
    }

    pub fn tracked_path(&self) -> &[HandSample] {
        &self.tracked_path
    }

    pub fn repetition_count(&self) -> u32 {
        self.repetition_count
    }

    fn wrong_phase(&self, cmd: &Command) -> SessionError {
        SessionError::WrongPhase {
            command: cmd.name().to_string(),
            phase: self.phase,
        }
    }

    pub fn apply_command(&mut self, cmd: Command) -> Result<CommandOutcome, SessionError> {
        use Phase::*;
        match (&cmd, self.phase) {
            (Command::SetLabels(labels), _) => {
                self.labels = labels.clone();
                Ok(CommandOutcome::Ack)
            }
            (Command::Calibrate(p), Calibrating) => {
                self.calibration_points.push(*p);
                if self.calibration_points.len() == 3 {
                    let [a, b, c] = [
                        self.calibration_points[0],
                        self.calibration_points[1],
                        self.calibration_points[2],
                    ];
                    self.calibration_points.clear();
                    self.frame = Some(Frame::from_three_points(a, b, c)?);
                    self.phase = Selecting;
                }
                Ok(CommandOutcome::Ack)
            }
            (Command::SelectTrajectory(t), Selecting) => {
                t.validate()?;
                self.trajectory = Some(t.clone());
                self.offset = Vec3::ZERO;
                Ok(CommandOutcome::Ack)
            }
            (Command::PlaceMove { dx, dy, .. }, Selecting) => {
                if self.trajectory.is_none() {
                    return Err(SessionError::NoTrajectory);
                }
                self.offset += Vec3::new(*dx, *dy, 0.0);
                Ok(CommandOutcome::Ack)
            }
            (Command::SetCi(ci), Selecting) => {
                self.ci = *ci;
                Ok(CommandOutcome::Ack)
            }
            (Command::SetMode(mode), Selecting) => {
                self.mode = *mode;
                Ok(CommandOutcome::Ack)
            }
            (Command::Start, Selecting) => {
                let placed = self.placed_trajectory().ok_or(SessionError::NoTrajectory)?;
                let cell = self.ci.diameter().max(2.0 * placed.spacing);
                self.index = Some(SpatialIndex::new(&placed.via_points, cell));
                self.tunnel = TunnelState::painted(
                    placed.via_points.len(),
                    self.mode,
                    self.config.feedback.idle(),
                );
                self.placed = Some(placed);
                self.tracked_path.clear();
                self.error_sum = 0.0;
                self.repetition_count = 0;
                self.tracker = RepetitionTracker::default();
                self.phase = Executing;
                Ok(CommandOutcome::TunnelPainted(self.tunnel.updates()))
            }
            (Command::Stop, Executing) => {
                self.phase = Stopped;
                Ok(CommandOutcome::Stopped(Box::new(self.summary())))
            }
            (Command::ResetTunnel, Executing) => {
                self.repaint();
                Ok(CommandOutcome::TunnelPainted(self.tunnel.updates()))
            }
            (Command::ResetTunnel, Stopped) => {
                self.tunnel = TunnelState::painted(0, self.mode, self.config.feedback.idle());
                self.placed = None;
                self.index = None;
                self.tracked_path.clear();
                self.error_sum = 0.0;
                self.repetition_count = 0;
                self.phase = Selecting;
                Ok(CommandOutcome::Ack)
            }
            _ => Err(self.wrong_phase(&cmd)),
        }
    }

    fn repaint(&mut self) {
        let idle = self.config.feedback.idle();
        for s in &mut self.tunnel.spheres {
            s.best_error = f64::INFINITY;
            s.look = idle;
        }
    }

    /// Scores one local-frame hand sample against the tunnel.
    pub fn process_sample(&mut self, s: HandSample) -> Result<FeedbackUpdate, SessionError> {
        if self.phase != Phase::Executing {
            return Err(SessionError::WrongPhase {
                command: "hand_sample".to_string(),
                phase: self.phase,
            });
        }
        if !(s.pos.is_finite() && s.t_ms.is_finite()) {
            return Err(SessionError::NonFiniteSample);
        }
        if let Some(last) = self.tracked_path.last() {
            if s.t_ms < last.t_ms {
                return Err(SessionError::NonMonotonicTime {
                    t_ms: s.t_ms,
                    last_ms: last.t_ms,
                });
            }
        }
        let placed = self.placed.as_ref().ok_or(SessionError::NoTrajectory)?;
        let index = self.index.as_ref().ok_or(SessionError::NoTrajectory)?;

        let inside = s.pos.distance(placed.start_point()) <= self.config.start_radius_m;
        let boundary = self.tracker.step(s.t_ms, inside, self.config.debounce_ms);

        // (index, look before this sample) for every sphere that may change
        let mut touched: Vec<(usize, SphereLook)> = Vec::new();
        if boundary {
            self.repetition_count += 1;
            if self.mode == FeedbackMode::ResetPerRep {
                let idle = self.config.feedback.idle();
                for (i, sphere) in self.tunnel.spheres.iter_mut().enumerate() {
                    if sphere.look != idle {
                        touched.push((i, sphere.look));
                    }
                    sphere.best_error = f64::INFINITY;
                    sphere.look = idle;
                }
            }
        }

        let (nearest, distance) = index.nearest(s.pos);
        let sphere = &mut self.tunnel.spheres[nearest];
        if !touched.iter().any(|(i, _)| *i == nearest) {
            touched.push((nearest, sphere.look));
        }
        if distance < sphere.best_error {
            sphere.best_error = distance;
            sphere.look = self.config.feedback.look_for_error(distance, self.ci);
        }

        touched.sort_by_key(|(i, _)| *i);
        let changed = touched
            .into_iter()
            .filter_map(|(i, before)| {
                let look = self.tunnel.spheres[i].look;
                (look != before).then_some(SphereUpdate {
                    index: i,
                    scale: look.scale,
                    color: look.color,
                })
            })
            .collect();

        self.tracked_path.push(s);
        self.error_sum += distance;
        Ok(FeedbackUpdate {
            t_ms: s.t_ms,
            changed,
            current_error: distance,
            nearest_index: nearest,
            path_point: s.pos,
            repetition: self.repetition_count,
        })
    }

    pub fn summary(&self) -> SessionSummary {
        let n = self.tracked_path.len();
        SessionSummary {
            trajectory_id: self
                .trajectory
                .as_ref()
                .map(|t| t.id.clone())
                .unwrap_or_default(),
            ci: self.ci,
            mode: self.mode,
            labels: self.labels.clone(),
            repetitions: self.repetition_count,
            samples: n,
            mean_error_m: if n == 0 { 0.0 } else { self.error_sum / n as f64 },
            best_errors_m: self
                .tunnel
                .spheres
                .iter()
                .map(|s| s.best_error.is_finite().then_some(s.best_error))
                .collect(),
            tracked_path: self.tracked_path.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::look::Rgb;
    use crate::geometry::{generate_exercise, ExerciseId, ExerciseParams};

    fn ready_session() -> Session {
        let mut s = Session::default();
        for p in [Vec3::ZERO, Vec3::X, Vec3::Y] {
            s.apply_command(Command::Calibrate(p)).unwrap();
        }
        let t = generate_exercise(ExerciseId::T1, &ExerciseParams::default()).unwrap();
        s.apply_command(Command::SelectTrajectory(t)).unwrap();
        s
    }

    #[test]
    fn calibration_moves_to_selecting() {
        let mut s = Session::default();
        s.apply_command(Command::Calibrate(Vec3::ZERO)).unwrap();
        s.apply_command(Command::Calibrate(Vec3::X)).unwrap();
        assert_eq!(s.phase(), Phase::Calibrating);
        s.apply_command(Command::Calibrate(Vec3::Y)).unwrap();
        assert_eq!(s.phase(), Phase::Selecting);
        assert_eq!(s.frame(), Some(&Frame::IDENTITY));
    }

    #[test]
    fn collinear_calibration_restarts() {
        let mut s = Session::default();
        s.apply_command(Command::Calibrate(Vec3::ZERO)).unwrap();
        s.apply_command(Command::Calibrate(Vec3::X)).unwrap();
        let err = s.apply_command(Command::Calibrate(Vec3::X * 2.0)).unwrap_err();
        assert_eq!(err.code(), "CollinearPoints");
        assert_eq!(s.phase(), Phase::Calibrating);
    }

    #[test]
    fn start_paints_everything_red() {
        let mut s = ready_session();
        let out = s.apply_command(Command::Start).unwrap();
        assert_eq!(s.phase(), Phase::Executing);
        let CommandOutcome::TunnelPainted(all) = out else {
            panic!("expected a full repaint");
        };
        assert_eq!(all.len(), 31);
        assert!(all.iter().all(|u| u.scale == 1.0 && u.color == Rgb::RED));
    }

    #[test]
    fn place_move_ignores_vertical() {
        let mut s = ready_session();
        s.apply_command(Command::PlaceMove { dx: 0.1, dy: -0.05, dz: 0.3 }).unwrap();
        assert_eq!(s.offset(), Vec3::new(0.1, -0.05, 0.0));
        let placed = s.placed_trajectory().unwrap();
        assert_eq!(placed.start_point(), Vec3::new(0.1, -0.05, 0.0));
    }

    #[test]
    fn stop_outside_executing_is_wrong_phase() {
        let mut s = ready_session();
        let err = s.apply_command(Command::Stop).unwrap_err();
        assert!(matches!(err, SessionError::WrongPhase { phase: Phase::Selecting, .. }));
    }

    #[test]
    fn sample_while_selecting_is_wrong_phase() {
        let mut s = ready_session();
        let err = s.process_sample(HandSample::new(0.0, Vec3::ZERO)).unwrap_err();
        assert_eq!(err.code(), "WrongPhase");
    }

    #[test]
    fn centerline_sample_turns_sphere_dark_green() {
        let mut s = ready_session();
        s.apply_command(Command::Start).unwrap();
        let u = s.process_sample(HandSample::new(0.0, Vec3::new(0.0, 0.1, 0.0))).unwrap();
        assert_eq!(u.current_error, 0.0);
        assert_eq!(u.nearest_index, 10);
        assert_eq!(u.changed, vec![SphereUpdate { index: 10, scale: 0.3, color: Rgb::DARK_GREEN }]);
    }

    #[test]
    fn overwrite_keeps_minimum_in_either_order() {
        let at = |d: f64| Vec3::new(d, 0.1, 0.0);
        for order in [[0.04, 0.01], [0.01, 0.04]] {
            let mut s = ready_session();
            s.apply_command(Command::Start).unwrap();
            for (k, d) in order.iter().enumerate() {
                s.process_sample(HandSample::new(k as f64, at(*d))).unwrap();
            }
            let sphere = s.tunnel().spheres[10];
            assert!((sphere.best_error - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn unchanged_look_is_not_reported() {
        let mut s = ready_session();
        s.apply_command(Command::Start).unwrap();
        let far = HandSample::new(0.0, Vec3::new(0.2, 0.1, 0.0));
        let u = s.process_sample(far).unwrap();
        assert!(u.changed.is_empty());
    }

    #[test]
    fn time_must_not_go_backwards() {
        let mut s = ready_session();
        s.apply_command(Command::Start).unwrap();
        s.process_sample(HandSample::new(10.0, Vec3::ZERO)).unwrap();
        let err = s.process_sample(HandSample::new(9.0, Vec3::ZERO)).unwrap_err();
        assert!(matches!(err, SessionError::NonMonotonicTime { .. }));
    }

    #[test]
    fn reset_per_rep_repaints_on_return_to_start() {
        let mut s = ready_session();
        s.apply_command(Command::SetMode(FeedbackMode::ResetPerRep)).unwrap();
        s.apply_command(Command::Start).unwrap();
        let path = [(0.0, 0.0), (100.0, 0.1), (600.0, 0.2), (900.0, 0.1), (1200.0, 0.0)];
        let mut last = None;
        for (t, y) in path {
            last = Some(s.process_sample(HandSample::new(t, Vec3::new(0.0, y, 0.0))).unwrap());
        }
        let last = last.unwrap();
        assert_eq!(last.repetition, 1);
        assert_eq!(s.repetition_count(), 1);
        // only the start sphere, freshly scored, is green again
        let green: Vec<usize> = s
            .tunnel()
            .spheres
            .iter()
            .enumerate()
            .filter(|(_, sp)| sp.best_error.is_finite())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(green, vec![0]);
        let reported: Vec<usize> = last.changed.iter().map(|u| u.index).collect();
        assert_eq!(reported, vec![10, 20]);
    }

    #[test]
    fn brief_excursion_is_not_a_repetition() {
        let mut s = ready_session();
        s.apply_command(Command::Start).unwrap();
        for (t, y) in [(0.0, 0.0), (100.0, 0.04), (200.0, 0.0)] {
            s.process_sample(HandSample::new(t, Vec3::new(0.0, y, 0.0))).unwrap();
        }
        assert_eq!(s.repetition_count(), 0);
    }
}

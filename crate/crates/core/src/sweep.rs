//! Batch simulation over exercises, seeds and conditions.
//!
//! Each seed stands for one simulated subject. For a given subject and
//! exercise every condition sees the same noise seed, so no-feedback and
//! feedback runs are paired.

use serde::{Deserialize, Serialize};

use crate::analytics::{analyze_path, AnalysisConfig, AnalyticsError, ErrorSummary, Space};
use crate::arm::ArmGeometry;
use crate::exec::ExecMode;
use crate::geometry::{generate_exercise, ExerciseId, ExerciseParams, GeometryError, Trajectory};
use crate::labels::{Condition, SessionLabels};
use crate::sim::{run_closed_loop, run_open_loop, SimConfig, SimError, SimRun};
use crate::stats::ErrRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub exercises: Vec<ExerciseId>,
    /// Number of simulated subjects; subject `k` uses seed `base_seed + k`.
    pub subjects: u64,
    pub base_seed: u64,
    /// Feedback conditions run in closed loop next to the open-loop baseline.
    pub conditions: Vec<Condition>,
    pub gain: f64,
    pub wander_sd: f64,
    /// Closed-loop deadband as a fraction of the tunnel radius.
    pub deadband: f64,
    pub joint_space: bool,
    pub exercise_params: ExerciseParams,
    pub analysis: AnalysisConfig,
    pub arm: ArmGeometry,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            exercises: ExerciseId::ALL.to_vec(),
            subjects: 15,
            base_seed: 1,
            conditions: vec![Condition::C1, Condition::C2, Condition::C3],
            gain: 2.0,
            wander_sd: 0.01,
            deadband: 0.2,
            joint_space: true,
            exercise_params: ExerciseParams::default(),
            analysis: AnalysisConfig::default(),
            arm: ArmGeometry::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{subject} {exercise} {condition}: {source}")]
    Sim {
        subject: String,
        exercise: ExerciseId,
        condition: Condition,
        source: SimError,
    },
    #[error("{subject} {exercise} {condition}: {source}")]
    Analysis {
        subject: String,
        exercise: ExerciseId,
        condition: Condition,
        source: AnalyticsError,
    },
}

/// One simulation to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub subject: String,
    pub exercise: ExerciseId,
    pub condition: Condition,
    pub sim: SimConfig,
}

pub fn subject_name(k: u64) -> String {
    format!("s{:02}", k + 1)
}

/// Noise seed shared by every condition of one subject and exercise.
pub fn pair_seed(base: u64, subject: u64, exercise: ExerciseId) -> u64 {
    let e = ExerciseId::ALL.iter().position(|x| *x == exercise).unwrap_or(0) as u64;
    (base + subject) * 16 + e
}

impl SweepConfig {
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for s in 0..self.subjects {
            for &exercise in &self.exercises {
                let conditions = std::iter::once(Condition::NoFeedback)
                    .chain(self.conditions.iter().copied().filter(|c| *c != Condition::NoFeedback));
                for condition in conditions {
                    let mut sim = SimConfig::new(exercise, condition).with_seed(pair_seed(self.base_seed, s, exercise));
                    sim.noise.wander_sd = self.wander_sd;
                    sim.deadband = self.deadband;
                    sim.subject = Some(subject_name(s));
                    out.push(RunSpec {
                        subject: subject_name(s),
                        exercise,
                        condition,
                        sim,
                    });
                }
            }
        }
        out
    }
}

/// Result of one run: the end-effector summary and, when requested, the
/// joint-space one.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub spec: RunSpec,
    pub end_effector: ErrorSummary,
    pub joint: Option<ErrorSummary>,
}

pub fn simulate(spec: &RunSpec, traj: &Trajectory, gain: f64) -> Result<SimRun, SweepError> {
    let r = if spec.condition == Condition::NoFeedback {
        run_open_loop(&spec.sim, traj)
    } else {
        run_closed_loop(&spec.sim, traj, gain)
    };
    r.map_err(|source| SweepError::Sim {
        subject: spec.subject.clone(),
        exercise: spec.exercise,
        condition: spec.condition,
        source,
    })
}

fn execute(cfg: &SweepConfig, spec: &RunSpec, traj: &Trajectory) -> Result<RunResult, SweepError> {
    let run = simulate(spec, traj, cfg.gain)?;
    let labels = SessionLabels {
        subject: Some(spec.subject.clone()),
        exercise: Some(spec.exercise),
        condition: Some(spec.condition),
    };
    let analyze = |space| {
        analyze_path(run.path(), &run.trajectory, space, &cfg.arm, &cfg.analysis, &labels).map_err(|source| {
            SweepError::Analysis {
                subject: spec.subject.clone(),
                exercise: spec.exercise,
                condition: spec.condition,
                source,
            }
        })
    };
    Ok(RunResult {
        spec: spec.clone(),
        end_effector: analyze(Space::EndEffector)?,
        joint: if cfg.joint_space { Some(analyze(Space::Joint)?) } else { None },
    })
}

/// Runs the whole sweep. Results come back in [`SweepConfig::runs`] order
/// whatever the execution mode.
pub fn run_sweep(cfg: &SweepConfig, mode: ExecMode) -> Result<Vec<RunResult>, SweepError> {
    let trajectories: Vec<(ExerciseId, Trajectory)> = cfg
        .exercises
        .iter()
        .map(|&id| Ok((id, generate_exercise(id, &cfg.exercise_params)?)))
        .collect::<Result<_, GeometryError>>()?;
    let runs = cfg.runs();
    mode.map(&runs, |spec| {
        let traj = &trajectories.iter().find(|(id, _)| *id == spec.exercise).expect("generated above").1;
        execute(cfg, spec, traj)
    })
    .into_iter()
    .collect()
}

/// Analytics CSV rows (end-effector in meters, joints in degrees).
pub fn err_rows(results: &[RunResult]) -> Vec<ErrRow> {
    let mut rows = Vec::new();
    for r in results {
        for s in std::iter::once(&r.end_effector).chain(r.joint.as_ref()) {
            rows.push(ErrRow {
                subject: r.spec.subject.clone(),
                exercise: r.spec.exercise,
                condition: r.spec.condition,
                space: s.space,
                err: s.err_reported(),
            });
        }
    }
    rows
}

//! Offline kinematic error pipeline.
//!
//! A tracked hand path is split into repetitions, each repetition is
//! resampled to a fixed number of normalized-time samples and compared,
//! sample by sample, with the desired repetition path resampled to the same
//! count. Errors are averaged over samples, then over repetitions.

mod metrics;
mod normalize;
mod segment;

pub use metrics::{
    err_task, joint_err_task, joint_sample_error, sample_rmse, ErrorSummary, Repetition,
    RepetitionSet, Space,
};
pub use normalize::{time_normalize, Interpolate, Timed};
pub use segment::{repetition_bounds, segment_repetitions, SegmentBounds, SegmentConfig};

use serde::{Deserialize, Serialize};

use crate::arm::{solve_path, ArmGeometry, JointVector, PathIkError, DEFAULT_SEED};
use crate::feedback::HandSample;
use crate::geometry::polyline::sample_uniform;
use crate::geometry::{Trajectory, Vec3};
use crate::labels::SessionLabels;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("path is empty")]
    EmptyPath,
    #[error("found {found} repetitions, expected {expected}")]
    SegmentationFailed { found: usize, expected: usize },
    #[error("repetition set is empty")]
    EmptySet,
    #[error("repetitions have different sample counts")]
    RaggedSet,
    #[error("joint reconstruction failed at {0}")]
    Ik(#[from] PathIkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub segment: SegmentConfig,
    /// Normalized samples per repetition.
    pub samples_per_rep: usize,
    /// Repetitions expected in a task.
    pub repetitions: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            segment: SegmentConfig::default(),
            samples_per_rep: 200,
            repetitions: 5,
        }
    }
}

/// Desired positions of one repetition at `count` normalized times
/// (constant speed along the repetition path).
pub fn desired_repetition(traj: &Trajectory, count: usize) -> Vec<Vec3> {
    sample_uniform(&traj.repetition_path(), count)
}

pub fn end_effector_repetitions(
    path: &[HandSample],
    traj: &Trajectory,
    cfg: &AnalysisConfig,
) -> Result<RepetitionSet<Vec3>, AnalyticsError> {
    let bounds = repetition_bounds(path, traj.start_point(), cfg.repetitions, &cfg.segment)?;
    let desired = desired_repetition(traj, cfg.samples_per_rep);
    RepetitionSet::new(
        bounds
            .iter()
            .map(|b| Repetition {
                actual: time_normalize(&path[b.first..=b.last], cfg.samples_per_rep),
                desired: desired.clone(),
            })
            .collect(),
    )
}

/// Joint-space repetitions: every hand sample and every desired sample is
/// mapped through inverse kinematics (each path seeded with its previous
/// solution), then split and normalized on the same boundaries as the
/// end-effector path.
pub fn joint_repetitions(
    path: &[HandSample],
    traj: &Trajectory,
    arm: &ArmGeometry,
    cfg: &AnalysisConfig,
) -> Result<RepetitionSet<JointVector>, AnalyticsError> {
    let bounds = repetition_bounds(path, traj.start_point(), cfg.repetitions, &cfg.segment)?;
    let positions: Vec<Vec3> = path.iter().map(|s| s.pos).collect();
    let joints = solve_path(arm, &positions, &DEFAULT_SEED)?;
    let timed: Vec<(f64, JointVector)> = path.iter().map(|s| s.t_ms).zip(joints).collect();
    let desired = solve_path(arm, &desired_repetition(traj, cfg.samples_per_rep), &DEFAULT_SEED)?;
    RepetitionSet::new(
        bounds
            .iter()
            .map(|b| Repetition {
                actual: time_normalize(&timed[b.first..=b.last], cfg.samples_per_rep),
                desired: desired.clone(),
            })
            .collect(),
    )
}

/// Full pipeline from a tracked path to an [`ErrorSummary`].
pub fn analyze_path(
    path: &[HandSample],
    traj: &Trajectory,
    space: Space,
    arm: &ArmGeometry,
    cfg: &AnalysisConfig,
    labels: &SessionLabels,
) -> Result<ErrorSummary, AnalyticsError> {
    let summary = match space {
        Space::EndEffector => err_task(&end_effector_repetitions(path, traj, cfg)?),
        Space::Joint => joint_err_task(&joint_repetitions(path, traj, arm, cfg)?),
    };
    Ok(summary.with_labels(labels))
}

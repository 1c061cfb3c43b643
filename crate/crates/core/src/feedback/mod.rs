//! Live scoring of hand samples against the trajectory tunnel.

mod look;
mod record;
mod session;
mod spatial;

pub use look::{feedback_for_error, FeedbackConfig, Rgb, SphereLook};
pub use record::{record_demonstration, DEFAULT_SMOOTH_WINDOW};
pub use session::{
    Command, CommandOutcome, FeedbackMode, FeedbackUpdate, HandSample, Phase, Session,
    SessionConfig, SessionError, SessionSummary, SphereState, SphereUpdate, TunnelState,
};
pub use spatial::SpatialIndex;

use crate::geometry::{ConfidenceInterval, Trajectory, Vec3};

/// Grid index over a trajectory's via-points, sized for the given tunnel.
pub fn build_spatial_index(traj: &Trajectory, ci: ConfidenceInterval) -> SpatialIndex {
    SpatialIndex::new(&traj.via_points, ci.diameter().max(2.0 * traj.spacing))
}

pub fn nearest_via_point(index: &SpatialIndex, p: Vec3) -> (usize, f64) {
    index.nearest(p)
}

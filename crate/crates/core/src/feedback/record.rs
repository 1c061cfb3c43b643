use super::session::HandSample;
use crate::geometry::polyline::{moving_average, resample_polyline};
use crate::geometry::{GeometryError, Trajectory, TrajectoryMetadata, Vec3};

pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

/// Turns a demonstrated hand path into a trajectory: centered moving-average
/// smoothing over `smooth_window` samples, then arc-length resampling.
pub fn record_demonstration(
    id: impl Into<String>,
    samples: &[HandSample],
    spacing: f64,
    smooth_window: usize,
    author: Option<String>,
) -> Result<Trajectory, GeometryError> {
    if samples.len() < 2 {
        return Err(GeometryError::TooFewPoints {
            got: samples.len(),
            need: 2,
        });
    }
    let raw: Vec<Vec3> = samples.iter().map(|s| s.pos).collect();
    let smoothed = moving_average(&raw, smooth_window);
    let via_points = resample_polyline(&smoothed, spacing)?;
    Trajectory::new(
        id,
        spacing,
        via_points,
        TrajectoryMetadata {
            author: Some(author.unwrap_or_else(|| "unknown".to_string())),
            ..Default::default()
        },
    )
}

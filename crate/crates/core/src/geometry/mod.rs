//! Coordinate frames, trajectory construction, resampling and the built-in
//! exercise library. All lengths are meters.

mod exercise;
mod frame;
pub mod polyline;
mod trajectory;
mod vec3;

pub use exercise::{generate_exercise, ExerciseId, ExerciseParams};
pub use frame::{Direction, Frame, MIN_POINT_SEPARATION, MIN_TRIANGLE_AREA};
pub use polyline::{arc_length, resample_polyline};
pub use trajectory::{ConfidenceInterval, Trajectory, TrajectoryMetadata, DEFAULT_SPACING};
pub use vec3::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("calibration points are collinear (triangle area {area:e} m²)")]
    CollinearPoints { area: f64 },
    #[error("two calibration points coincide")]
    CoincidentPoints,
    #[error("path of length {length} m is shorter than the spacing {spacing} m")]
    DegeneratePath { length: f64, spacing: f64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("exercise dimensions must be positive")]
    InvalidDimensions,
    #[error("non-finite coordinate")]
    NonFinite,
}

/// Free-function form of [`Frame::from_three_points`].
pub fn frame_from_three_points(p1: Vec3, p2: Vec3, p3: Vec3) -> Result<Frame, GeometryError> {
    Frame::from_three_points(p1, p2, p3)
}

pub fn transform_point(frame: &Frame, p: Vec3, direction: Direction) -> Vec3 {
    frame.transform(p, direction)
}

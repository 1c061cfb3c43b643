//! Built-in exercise library.
//!
//! Local axes: x points away from the patient, y to the patient's left and
//! z along the working-plane normal. Every exercise starts at
//! `(0, 0, level)` where `level` is the table or shoulder height.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::polyline::resample_polyline;
use super::trajectory::{Trajectory, TrajectoryMetadata, DEFAULT_SPACING};
use super::{GeometryError, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExerciseId {
    T1,
    T2,
    T3,
    T4,
}

impl ExerciseId {
    pub const ALL: [ExerciseId; 4] = [Self::T1, Self::T2, Self::T3, Self::T4];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::T1 => "T1",
            Self::T2 => "T2",
            Self::T3 => "T3",
            Self::T4 => "T4",
        }
    }
}

impl fmt::Display for ExerciseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExerciseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Self::T1),
            "T2" => Ok(Self::T2),
            "T3" => Ok(Self::T3),
            "T4" => Ok(Self::T4),
            _ => Err(format!("unknown exercise `{s}`")),
        }
    }
}

/// Exercise dimensions in meters, relative to the calibrated plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExerciseParams {
    pub reach: f64,
    pub table_height: f64,
    pub shoulder_height: f64,
    pub circle_radius: f64,
    pub spacing: f64,
}

impl Default for ExerciseParams {
    fn default() -> Self {
        Self {
            reach: 0.30,
            table_height: 0.0,
            shoulder_height: 0.30,
            circle_radius: 0.15,
            spacing: DEFAULT_SPACING,
        }
    }
}

// vertices used to trace the circle before resampling
const CIRCLE_VERTICES: usize = 720;

pub fn generate_exercise(id: ExerciseId, params: &ExerciseParams) -> Result<Trajectory, GeometryError> {
    let dims = [params.reach, params.circle_radius, params.spacing];
    if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(GeometryError::InvalidDimensions);
    }
    let table = Vec3::new(0.0, 0.0, params.table_height);
    let shoulder = Vec3::new(0.0, 0.0, params.shoulder_height);
    let raw = match id {
        ExerciseId::T1 => vec![table, table + Vec3::Y * params.reach],
        ExerciseId::T2 => vec![shoulder, shoulder + Vec3::Y * params.reach],
        ExerciseId::T3 => vec![shoulder, shoulder + Vec3::X * params.reach],
        ExerciseId::T4 => clockwise_circle(table, params.circle_radius),
    };
    let via_points = resample_polyline(&raw, params.spacing)?;
    Trajectory::new(
        id.as_str(),
        params.spacing,
        via_points,
        TrajectoryMetadata {
            exercise: Some(id.as_str().to_string()),
            ..Default::default()
        },
    )
}

/// Clockwise seen from above (against +z), centered to the left of `start`.
fn clockwise_circle(start: Vec3, radius: f64) -> Vec<Vec3> {
    let center = start + Vec3::Y * radius;
    // start sits at angle -pi/2 from the center; clockwise means decreasing angle
    (0..=CIRCLE_VERTICES)
        .map(|k| {
            if k == 0 || k == CIRCLE_VERTICES {
                return start;
            }
            let a = -PI / 2.0 - 2.0 * PI * k as f64 / CIRCLE_VERTICES as f64;
            center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect()
}

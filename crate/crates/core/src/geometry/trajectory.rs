use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::polyline::arc_length;
use super::{GeometryError, Vec3};

/// Default distance between consecutive via-points.
pub const DEFAULT_SPACING: f64 = 0.01;

/// Tunnel diameter setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfidenceInterval {
    #[serde(alias = "c1")]
    C1,
    #[serde(alias = "c2")]
    C2,
    #[serde(alias = "c3")]
    C3,
}

impl ConfidenceInterval {
    pub const ALL: [ConfidenceInterval; 3] = [Self::C1, Self::C2, Self::C3];

    /// Tunnel diameter in meters.
    pub fn diameter(self) -> f64 {
        match self {
            Self::C1 => 0.10,
            Self::C2 => 0.065,
            Self::C3 => 0.03,
        }
    }

    /// Allowed deviation from the centerline.
    pub fn radius(self) -> f64 {
        self.diameter() / 2.0
    }
}

impl fmt::Display for ConfidenceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::C1 => "C1",
            Self::C2 => "C2",
            Self::C3 => "C3",
        };
        f.write_str(s)
    }
}

impl FromStr for ConfidenceInterval {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(Self::C1),
            "C2" => Ok(Self::C2),
            "C3" => Ok(Self::C3),
            _ => Err(format!("unknown confidence interval `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exercise: Option<String>,
}

/// Desired path as an ordered list of via-points in the local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub id: String,
    #[serde(rename = "spacing_m")]
    pub spacing: f64,
    #[serde(rename = "via_points_m")]
    pub via_points: Vec<Vec3>,
    #[serde(default)]
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    pub fn new(
        id: impl Into<String>,
        spacing: f64,
        via_points: Vec<Vec3>,
        metadata: TrajectoryMetadata,
    ) -> Result<Self, GeometryError> {
        let t = Self {
            id: id.into(),
            spacing,
            via_points,
            metadata,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.via_points.len() < 2 {
            return Err(GeometryError::TooFewPoints {
                got: self.via_points.len(),
                need: 2,
            });
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(GeometryError::InvalidSpacing(self.spacing));
        }
        if self.via_points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(())
    }

    pub fn start_point(&self) -> Vec3 {
        self.via_points[0]
    }

    pub fn end_point(&self) -> Vec3 {
        self.via_points[self.via_points.len() - 1]
    }

    pub fn length(&self) -> f64 {
        arc_length(&self.via_points)
    }

    /// A path is closed when it ends within one spacing of where it starts.
    pub fn is_closed(&self) -> bool {
        self.start_point().distance(self.end_point()) <= self.spacing
    }

    /// The path of one repetition: a closed path is traversed once, an open
    /// one out and back.
    pub fn repetition_path(&self) -> Vec<Vec3> {
        if self.is_closed() {
            return self.via_points.clone();
        }
        let mut out = self.via_points.clone();
        out.extend(self.via_points.iter().rev().skip(1));
        out
    }

    /// Copy with every via-point shifted by `offset`.
    pub fn translated(&self, offset: Vec3) -> Trajectory {
        Trajectory {
            via_points: self.via_points.iter().map(|&p| p + offset).collect(),
            ..self.clone()
        }
    }

    /// Largest relative deviation of a consecutive via-point gap from `spacing`.
    pub fn spacing_deviation(&self) -> f64 {
        self.via_points
            .windows(2)
            .map(|w| (w[0].distance(w[1]) - self.spacing).abs() / self.spacing)
            .fold(0.0, f64::max)
    }
}

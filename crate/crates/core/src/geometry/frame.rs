use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

/// Minimum distance between any two calibration points.
pub const MIN_POINT_SEPARATION: f64 = 1e-6;
/// Minimum triangle area spanned by the calibration points.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Calibrated working frame.
///
/// `axes` holds the local x, y and z axes expressed in world coordinates.
/// The local xy plane is the working plane and z is its normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Vec3,
    pub axes: [Vec3; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    WorldToLocal,
    LocalToWorld,
}

impl Default for Frame {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        origin: Vec3::ZERO,
        axes: [Vec3::X, Vec3::Y, Vec3::Z],
    };

    /// Builds the working frame from three demonstrated points.
    ///
    /// `p1` becomes the origin, `p1 -> p2` the local x axis and the normal of
    /// the triangle the local z axis.
    pub fn from_three_points(p1: Vec3, p2: Vec3, p3: Vec3) -> Result<Frame, GeometryError> {
        if !(p1.is_finite() && p2.is_finite() && p3.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let pairs = [(p1, p2), (p1, p3), (p2, p3)];
        if pairs
            .iter()
            .any(|(a, b)| a.distance(*b) < MIN_POINT_SEPARATION)
        {
            return Err(GeometryError::CoincidentPoints);
        }
        let e1 = p2 - p1;
        let e2 = p3 - p1;
        let n = e1.cross(e2);
        let area = 0.5 * n.norm();
        if area < MIN_TRIANGLE_AREA {
            return Err(GeometryError::CollinearPoints { area });
        }
        let x = e1.normalized().ok_or(GeometryError::CoincidentPoints)?;
        let z = n.normalized().ok_or(GeometryError::CollinearPoints { area })?;
        let y = z.cross(x);
        Ok(Frame {
            origin: p1,
            axes: [x, y, z],
        })
    }

    pub fn plane_normal(&self) -> Vec3 {
        self.axes[2]
    }

    pub fn world_to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(self.axes[0].dot(d), self.axes[1].dot(d), self.axes[2].dot(d))
    }

    pub fn local_to_world(&self, p: Vec3) -> Vec3 {
        self.origin + self.axes[0] * p.x + self.axes[1] * p.y + self.axes[2] * p.z
    }

    /// Rotates a local displacement into world coordinates (no translation).
    pub fn vector_to_world(&self, v: Vec3) -> Vec3 {
        self.axes[0] * v.x + self.axes[1] * v.y + self.axes[2] * v.z
    }

    pub fn transform(&self, p: Vec3, direction: Direction) -> Vec3 {
        match direction {
            Direction::WorldToLocal => self.world_to_local(p),
            Direction::LocalToWorld => self.local_to_world(p),
        }
    }

    /// Largest deviation of `axes` from an orthonormal basis.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.axes[i].dot(self.axes[j]) - want).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        self.axes[0].dot(self.axes[1].cross(self.axes[2]))
    }
}

use serde::{Deserialize, Serialize};

use crate::geometry::ConfidenceInterval;

/// 8-bit RGB color, serialized as `[r, g, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const DARK_GREEN: Rgb = Rgb::new(0, 100, 0);
    pub const RED: Rgb = Rgb::new(255, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Channel-wise linear blend, rounded to nearest.
    pub fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let mix = |a: u8, b: u8| -> u8 {
            let v = a as f64 + (b as f64 - a as f64) * t;
            v.round().clamp(0.0, 255.0) as u8
        };
        Rgb::new(mix(self.r, other.r), mix(self.g, other.g), mix(self.b, other.b))
    }
}

impl From<[u8; 3]> for Rgb {
    fn from(c: [u8; 3]) -> Self {
        Rgb::new(c[0], c[1], c[2])
    }
}

impl From<Rgb> for [u8; 3] {
    fn from(c: Rgb) -> Self {
        [c.r, c.g, c.b]
    }
}

/// Constants of the error-to-appearance mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackConfig {
    /// Sphere scale at zero error, as a fraction of the tunnel diameter.
    pub scale_min: f64,
    pub color_near: Rgb,
    pub color_far: Rgb,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            scale_min: 0.3,
            color_near: Rgb::DARK_GREEN,
            color_far: Rgb::RED,
        }
    }
}

/// How one sphere of the tunnel is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereLook {
    pub scale: f64,
    pub color: Rgb,
}

impl FeedbackConfig {
    /// Full-size sphere in the far color; the look of an untouched tunnel.
    pub fn idle(&self) -> SphereLook {
        SphereLook {
            scale: 1.0,
            color: self.color_far,
        }
    }

    /// Maps a centerline distance to a sphere look.
    ///
    /// The error is normalized by the tunnel radius and clamped to `[0, 1]`;
    /// scale and color are linear in it. At or beyond the radius the sphere
    /// is full size and pure far color.
    pub fn look_for_error(&self, distance: f64, ci: ConfidenceInterval) -> SphereLook {
        let r = ci.radius();
        if distance.is_nan() || distance >= r {
            return self.idle();
        }
        let u = (distance / r).clamp(0.0, 1.0);
        SphereLook {
            scale: self.scale_min + (1.0 - self.scale_min) * u,
            color: self.color_near.lerp(self.color_far, u),
        }
    }
}

/// [`FeedbackConfig::look_for_error`] with the default constants.
pub fn feedback_for_error(distance: f64, ci: ConfidenceInterval) -> SphereLook {
    FeedbackConfig::default().look_for_error(distance, ci)
}

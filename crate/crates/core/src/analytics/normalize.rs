use crate::arm::JointVector;
use crate::feedback::HandSample;
use crate::geometry::Vec3;

/// Values that can be linearly interpolated.
pub trait Interpolate: Copy {
    fn lerp(self, other: Self, t: f64) -> Self;
}

impl Interpolate for Vec3 {
    fn lerp(self, other: Self, t: f64) -> Self {
        Vec3::lerp(self, other, t)
    }
}

impl Interpolate for JointVector {
    fn lerp(self, other: Self, t: f64) -> Self {
        JointVector(std::array::from_fn(|i| self.0[i] + (other.0[i] - self.0[i]) * t))
    }
}

impl Interpolate for f64 {
    fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

/// A value stamped with a time in milliseconds.
pub trait Timed {
    type Value: Interpolate;
    fn t_ms(&self) -> f64;
    fn value(&self) -> Self::Value;
}

impl Timed for HandSample {
    type Value = Vec3;
    fn t_ms(&self) -> f64 {
        self.t_ms
    }
    fn value(&self) -> Vec3 {
        self.pos
    }
}

impl<V: Interpolate> Timed for (f64, V) {
    type Value = V;
    fn t_ms(&self) -> f64 {
        self.0
    }
    fn value(&self) -> V {
        self.1
    }
}

/// Resamples a segment at `count` uniformly spaced normalized times in
/// `[0, 1]` by linear interpolation. Both endpoints are kept.
pub fn time_normalize<S: Timed>(segment: &[S], count: usize) -> Vec<S::Value> {
    assert!(!segment.is_empty(), "cannot normalize an empty segment");
    if count == 0 {
        return Vec::new();
    }
    let first = &segment[0];
    let last = &segment[segment.len() - 1];
    if count == 1 {
        return vec![first.value()];
    }
    let (t0, t1) = (first.t_ms(), last.t_ms());
    let span = t1 - t0;
    if span <= 0.0 {
        // no time information: fall back to index spacing
        return (0..count)
            .map(|k| {
                let x = (segment.len() - 1) as f64 * k as f64 / (count - 1) as f64;
                let lo = (x.floor() as usize).min(segment.len() - 1);
                let hi = (lo + 1).min(segment.len() - 1);
                segment[lo].value().lerp(segment[hi].value(), x - lo as f64)
            })
            .collect();
    }
    (0..count)
        .map(|k| {
            if k == 0 {
                return first.value();
            }
            if k == count - 1 {
                return last.value();
            }
            let t = t0 + span * k as f64 / (count - 1) as f64;
            let hi = segment.partition_point(|s| s.t_ms() <= t).min(segment.len() - 1);
            let lo = hi.saturating_sub(1);
            let (ta, tb) = (segment[lo].t_ms(), segment[hi].t_ms());
            if tb <= ta {
                return segment[lo].value();
            }
            segment[lo].value().lerp(segment[hi].value(), (t - ta) / (tb - ta))
        })
        .collect()
}

//! Arc-length utilities over open polylines.

use super::{GeometryError, Vec3};

/// Sum of segment lengths.
pub fn arc_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Cumulative arc length at every vertex, starting at 0.
pub fn cumulative_lengths(points: &[Vec3]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(points.len());
    out.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        out.push(acc);
    }
    out
}

/// Arc-length parameterized view of a polyline.
#[derive(Debug, Clone)]
pub struct ArcParam<'a> {
    points: &'a [Vec3],
    cumulative: Vec<f64>,
}

impl<'a> ArcParam<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        Self {
            points,
            cumulative: cumulative_lengths(points),
        }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn at(&self, s: f64) -> Vec3 {
        let n = self.points.len();
        if n == 1 || s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return self.points[n - 1];
        }
        // first vertex with cumulative > s
        let hi = self.cumulative.partition_point(|&c| c <= s);
        let lo = hi - 1;
        let seg = self.cumulative[hi] - self.cumulative[lo];
        if seg <= 0.0 {
            return self.points[lo];
        }
        let t = (s - self.cumulative[lo]) / seg;
        self.points[lo].lerp(self.points[hi], t)
    }
}

/// Resamples a polyline to via-points evenly spaced in arc length.
///
/// The segment count is `round(length / spacing)`, so the realized spacing
/// is within half a spacing of the request spread over the whole path. Both
/// input endpoints are kept exactly.
pub fn resample_polyline(points: &[Vec3], spacing: f64) -> Result<Vec<Vec3>, GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::TooFewPoints {
            got: points.len(),
            need: 2,
        });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(GeometryError::InvalidSpacing(spacing));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let param = ArcParam::new(points);
    let length = param.length();
    if length < spacing {
        return Err(GeometryError::DegeneratePath { length, spacing });
    }
    let segments = ((length / spacing).round() as usize).max(1);
    Ok(sample_at_fractions(&param, segments + 1, points))
}

/// `count` points evenly spaced in arc length, endpoints included.
pub fn sample_uniform(points: &[Vec3], count: usize) -> Vec<Vec3> {
    assert!(!points.is_empty(), "cannot sample an empty polyline");
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![points[0]];
    }
    let param = ArcParam::new(points);
    sample_at_fractions(&param, count, points)
}

fn sample_at_fractions(param: &ArcParam<'_>, count: usize, points: &[Vec3]) -> Vec<Vec3> {
    let length = param.length();
    let last = count - 1;
    (0..count)
        .map(|k| match k {
            0 => points[0],
            k if k == last => points[points.len() - 1],
            k => param.at(length * k as f64 / last as f64),
        })
        .collect()
}

/// Centered moving average; the window shrinks symmetrically near the ends
/// so the first and last points are kept.
pub fn moving_average(points: &[Vec3], window: usize) -> Vec<Vec3> {
    let half = window.max(1) / 2;
    let n = points.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &points[i - h..=i + h];
            slice.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / slice.len() as f64
        })
        .collect()
}

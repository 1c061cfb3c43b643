use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::feedback::HandSample;
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Radius of the start sphere, meters.
    pub radius_m: f64,
    /// Excursions out of the start sphere shorter than this are jitter.
    pub debounce_ms: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            radius_m: 0.03,
            debounce_ms: 500.0,
        }
    }
}

/// Inclusive sample index range of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentBounds {
    pub first: usize,
    pub last: usize,
}

/// Splits a hand path into repetitions.
///
/// A repetition is an excursion out of the start sphere lasting at least
/// the debounce time, preceded and followed by a stay inside the sphere.
/// Shorter excursions count as part of the surrounding stay. Consecutive
/// repetitions share their boundary sample, which is the sample of the
/// stay closest to the start point, so each segment covers a whole
/// start-to-start stroke.
pub fn repetition_bounds(
    path: &[HandSample],
    start: Vec3,
    n_expected: usize,
    cfg: &SegmentConfig,
) -> Result<Vec<SegmentBounds>, AnalyticsError> {
    if path.is_empty() {
        return Err(AnalyticsError::EmptyPath);
    }
    let inside: Vec<bool> = path
        .iter()
        .map(|s| s.pos.distance(start) <= cfg.radius_m)
        .collect();

    // excursions as (first outside index, first inside index after it)
    let mut excursions = Vec::new();
    let mut k = 0;
    while k < path.len() {
        if inside[k] {
            k += 1;
            continue;
        }
        let exit = k;
        while k < path.len() && !inside[k] {
            k += 1;
        }
        let closed = exit > 0 && k < path.len();
        if closed && path[k].t_ms - path[exit].t_ms >= cfg.debounce_ms {
            excursions.push((exit, k));
        }
    }

    if excursions.len() != n_expected {
        return Err(AnalyticsError::SegmentationFailed {
            found: excursions.len(),
            expected: n_expected,
        });
    }
    if excursions.is_empty() {
        return Ok(Vec::new());
    }

    let closest = |lo: usize, hi: usize| -> usize {
        (lo..hi)
            .min_by(|&a, &b| {
                let da = path[a].pos.distance_squared(start);
                let db = path[b].pos.distance_squared(start);
                da.total_cmp(&db)
            })
            .unwrap_or(lo)
    };

    // stays: before the first excursion, between consecutive ones, after the last
    let mut boundaries = Vec::with_capacity(excursions.len() + 1);
    boundaries.push(closest(0, excursions[0].0));
    for w in excursions.windows(2) {
        boundaries.push(closest(w[0].1, w[1].0));
    }
    boundaries.push(closest(excursions[excursions.len() - 1].1, path.len()));

    Ok(boundaries
        .windows(2)
        .map(|w| SegmentBounds {
            first: w[0],
            last: w[1],
        })
        .collect())
}

/// Like [`repetition_bounds`] but returns the samples of each repetition.
pub fn segment_repetitions(
    path: &[HandSample],
    start: Vec3,
    n_expected: usize,
    cfg: &SegmentConfig,
) -> Result<Vec<Vec<HandSample>>, AnalyticsError> {
    Ok(repetition_bounds(path, start, n_expected, cfg)?
        .into_iter()
        .map(|b| path[b.first..=b.last].to_vec())
        .collect())
}

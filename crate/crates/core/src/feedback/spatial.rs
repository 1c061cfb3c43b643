//! Uniform-grid nearest via-point lookup.
//!
//! Cells are scanned in growing Chebyshev rings around the query cell (the
//! query is clamped into the grid first). The scan stops once the best hit
//! is strictly closer than every cell not yet visited, so results, ties
//! included, match an exhaustive scan.

use crate::geometry::Vec3;

/// Hard cap on the number of cells; the cell size grows to respect it.
const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialIndex {
    points: Vec<Vec3>,
    min: Vec3,
    cell: f64,
    dims: [usize; 3],
    // CSR layout: indices of cell c live in items[starts[c]..starts[c + 1]]
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialIndex {
    /// Builds the grid with the requested cell edge (clamped to stay positive
    /// and to the cell budget).
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(!points.is_empty(), "spatial index needs at least one point");
        let mut min = points[0];
        let mut max = points[0];
        for p in points {
            min = Vec3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Vec3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        let extent = max - min;
        let mut cell = if cell > 0.0 && cell.is_finite() {
            cell
        } else {
            extent.norm().max(1e-3)
        };
        let dims = loop {
            let dims = [
                (extent.x / cell).floor() as usize + 1,
                (extent.y / cell).floor() as usize + 1,
                (extent.z / cell).floor() as usize + 1,
            ];
            if dims.iter().product::<usize>() <= MAX_CELLS {
                break dims;
            }
            cell *= 2.0;
        };

        let n_cells = dims[0] * dims[1] * dims[2];
        let cell_of: Vec<usize> = points
            .iter()
            .map(|&p| {
                let c = Self::cell_coords(min, cell, dims, p);
                Self::flat(dims, c)
            })
            .collect();
        let mut counts = vec![0u32; n_cells + 1];
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for i in 0..n_cells {
            counts[i + 1] += counts[i];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; points.len()];
        // ascending point order keeps each cell's list sorted by index
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            points: points.to_vec(),
            min,
            cell,
            dims,
            starts,
            items,
        }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn cell_coords(min: Vec3, cell: f64, dims: [usize; 3], p: Vec3) -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - min[a]) / cell).floor();
            c[a] = if f.is_nan() || f < 0.0 {
                0
            } else {
                (f as usize).min(dims[a] - 1)
            };
        }
        c
    }

    fn flat(dims: [usize; 3], c: [usize; 3]) -> usize {
        (c[2] * dims[1] + c[1]) * dims[0] + c[0]
    }

    /// Closest via-point to `p` as `(index, distance)`; ties go to the lower
    /// index.
    pub fn nearest(&self, p: Vec3) -> (usize, f64) {
        let center = Self::cell_coords(self.min, self.cell, self.dims, p);
        let mut best = (usize::MAX, f64::INFINITY);
        let max_ring = self.dims.iter().copied().max().unwrap_or(1);
        for ring in 0..=max_ring {
            let lo: [usize; 3] = std::array::from_fn(|a| center[a].saturating_sub(ring));
            let hi: [usize; 3] = std::array::from_fn(|a| (center[a] + ring).min(self.dims[a] - 1));
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let on_shell = [x, y, z]
                            .iter()
                            .zip(&center)
                            .any(|(&c, &m)| c.abs_diff(m) == ring);
                        if !on_shell {
                            continue;
                        }
                        self.scan_cell(Self::flat(self.dims, [x, y, z]), p, &mut best);
                    }
                }
            }
            match self.unvisited_lower_bound(p, lo, hi) {
                None => break,
                Some(bound) if best.1 * best.1 < bound * bound => break,
                Some(_) => {}
            }
        }
        (best.0, best.1)
    }

    fn scan_cell(&self, cell: usize, p: Vec3, best: &mut (usize, f64)) {
        let (s, e) = (self.starts[cell] as usize, self.starts[cell + 1] as usize);
        for &i in &self.items[s..e] {
            let i = i as usize;
            let d = self.points[i].distance(p);
            if d < best.1 || (d == best.1 && i < best.0) {
                *best = (i, d);
            }
        }
    }

    /// Distance from `p` to the nearest cell outside the box `lo..=hi`, or
    /// `None` when the box already covers the whole grid.
    fn unvisited_lower_bound(&self, p: Vec3, lo: [usize; 3], hi: [usize; 3]) -> Option<f64> {
        let mut bound: Option<f64> = None;
        for a in 0..3 {
            if lo[a] > 0 {
                let face = self.min[a] + lo[a] as f64 * self.cell;
                let d = (p[a] - face).max(0.0);
                bound = Some(bound.map_or(d, |b| b.min(d)));
            }
            if hi[a] + 1 < self.dims[a] {
                let face = self.min[a] + (hi[a] + 1) as f64 * self.cell;
                let d = (face - p[a]).max(0.0);
                bound = Some(bound.map_or(d, |b| b.min(d)));
            }
        }
        bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(points: &[Vec3], p: Vec3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, q) in points.iter().enumerate() {
            let d = q.distance(p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn single_point_always_wins() {
        let idx = SpatialIndex::new(&[Vec3::new(0.1, 0.2, 0.3)], 0.05);
        for p in [Vec3::ZERO, Vec3::new(100.0, -5.0, 2.0), Vec3::new(0.1, 0.2, 0.3)] {
            assert_eq!(idx.nearest(p).0, 0);
        }
    }

    #[test]
    fn exact_hit_has_zero_distance() {
        let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        let idx = SpatialIndex::new(&pts, 0.02);
        assert_eq!(idx.nearest(pts[17]), (17, 0.0));
    }

    #[test]
    fn lateral_offset_distance() {
        let pts: Vec<Vec3> = (0..=30).map(|i| Vec3::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        let idx = SpatialIndex::new(&pts, 0.1);
        let (i, d) = idx.nearest(Vec3::new(0.15, 0.02, 0.0));
        assert_eq!(i, 15);
        assert!((d - 0.02).abs() < 1e-15);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let pts = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
        let idx = SpatialIndex::new(&pts, 0.1);
        assert_eq!(idx.nearest(Vec3::ZERO).0, 0);
        let pts = vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        let idx = SpatialIndex::new(&pts, 0.1);
        assert_eq!(idx.nearest(Vec3::ZERO).0, 0);
    }

    #[test]
    fn far_queries_fall_back_to_global_nearest() {
        let pts: Vec<Vec3> = (0..100)
            .map(|i| {
                let a = i as f64 * 0.0628;
                Vec3::new(a.cos() * 0.15, a.sin() * 0.15, 0.0)
            })
            .collect();
        let idx = SpatialIndex::new(&pts, 0.03);
        for p in [
            Vec3::new(50.0, 3.0, -2.0),
            Vec3::new(-7.0, -7.0, 7.0),
            Vec3::new(0.0, 0.0, 10.0),
        ] {
            assert_eq!(idx.nearest(p), brute(&pts, p));
        }
    }
}

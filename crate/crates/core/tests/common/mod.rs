#![allow(dead_code)]

use holotunnel::analytics::{Repetition, RepetitionSet};
use holotunnel::geometry::Vec3;
use rand::Rng;

pub fn random_vec3<R: Rng>(rng: &mut R, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

pub fn random_rep_set<R: Rng>(rng: &mut R) -> RepetitionSet<Vec3> {
    let n = rng.random_range(1..=8);
    let samples = rng.random_range(1..=250);
    let reps = (0..n)
        .map(|_| Repetition {
            actual: (0..samples).map(|_| random_vec3(rng, 0.5)).collect(),
            desired: (0..samples).map(|_| random_vec3(rng, 0.5)).collect(),
        })
        .collect();
    RepetitionSet::new(reps).unwrap()
}

/// Two nested loops over repetitions and samples with plain sums.
pub fn nested_loop_err(set: &RepetitionSet<Vec3>) -> f64 {
    let reps = set.repetitions();
    let mut outer = 0.0;
    for rep in reps {
        let mut inner = 0.0;
        for i in 0..rep.actual.len() {
            let dx = rep.actual[i].x - rep.desired[i].x;
            let dy = rep.actual[i].y - rep.desired[i].y;
            let dz = rep.actual[i].z - rep.desired[i].z;
            inner += (dx * dx + dy * dy + dz * dz).sqrt();
        }
        outer += inner / rep.actual.len() as f64;
    }
    outer / reps.len() as f64
}

pub fn brute_nearest(points: &[Vec3], p: Vec3) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, q) in points.iter().enumerate() {
        let d = q.distance(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Two-sided signed-rank p-value by listing all 2^n sign patterns of the
/// given ranks: twice the smaller tail at the observed positive rank sum,
/// capped at 1.
pub fn enumerated_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let total = 1u64 << n;
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0..total {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= w_plus + 1e-9 {
            le += 1;
        }
        if w >= w_plus - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

/// Average 1-based ranks of |d| for non-zero d, and the positive rank sum.
pub fn signed_ranks(diffs: &[f64]) -> (Vec<f64>, f64) {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let tied = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect();
    let w_plus = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    (ranks, w_plus)
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

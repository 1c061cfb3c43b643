//! Four-joint serial arm: three intersecting shoulder axes and an elbow.
//!
//! Conventions (local frame: x forward, y left, z up). At zero the arm hangs
//! straight down from the shoulder. The shoulder rotation is
//! `Rx(q1) * Ry(-q2) * Rz(q3)`:
//!
//! * `q1` abduction swings the arm toward +y,
//! * `q2` flexion swings it forward toward +x,
//! * `q3` internal rotation turns it about its own long axis,
//! * `q4` elbow flexion bends the forearm toward the upper arm's forward side.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Joint angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct JointVector(pub [f64; 4]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; 4]);

    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Self([q1, q2, q3, q4])
    }

    pub fn max_abs_diff(&self, o: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(&o.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }
}

impl From<[f64; 4]> for JointVector {
    fn from(q: [f64; 4]) -> Self {
        Self(q)
    }
}

impl From<JointVector> for [f64; 4] {
    fn from(q: JointVector) -> Self {
        q.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointLimits {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl Default for JointLimits {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self {
            lower: [-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2, 0.0],
            upper: [FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 2.6],
        }
    }
}

impl JointLimits {
    const SLACK: f64 = 1e-12;

    pub fn contains(&self, q: &JointVector) -> bool {
        (0..4).all(|i| q.0[i] >= self.lower[i] - Self::SLACK && q.0[i] <= self.upper[i] + Self::SLACK)
    }

    pub fn clamp(&self, q: JointVector) -> JointVector {
        JointVector(std::array::from_fn(|i| q.0[i].clamp(self.lower[i], self.upper[i])))
    }
}

/// Segment lengths and shoulder position (local frame).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmGeometry {
    #[serde(rename = "upper_arm_length_m")]
    pub upper_arm_length: f64,
    #[serde(rename = "forearm_length_m")]
    pub forearm_length: f64,
    #[serde(rename = "shoulder_origin_m")]
    pub shoulder_origin: Vec3,
    pub limits: JointLimits,
}

impl Default for ArmGeometry {
    fn default() -> Self {
        // shoulder behind the exercise start point, at shoulder-exercise height
        Self {
            upper_arm_length: 0.30,
            forearm_length: 0.25,
            shoulder_origin: Vec3::new(-0.20, 0.0, 0.30),
            limits: JointLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArmError {
    #[error("joint {joint} at {value} rad is outside its limits")]
    JointLimit { joint: usize, value: f64 },
    #[error("target at {distance} m from the shoulder is outside the reach annulus [{min}, {max}]")]
    Unreachable { distance: f64, min: f64, max: f64 },
    #[error("inverse kinematics did not converge (residual {residual:e} m)")]
    NoConvergence { residual: f64 },
    #[error("invalid arm geometry")]
    InvalidGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mat3([[f64; 3]; 3]);

impl Mat3 {
    fn rot_x(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    fn rot_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    fn rot_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    fn mul(&self, o: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum())
        }))
    }

    fn apply(&self, v: Vec3) -> Vec3 {
        let r = &self.0;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

/// Positions and world joint axes of one configuration.
struct Pose {
    elbow: Vec3,
    hand: Vec3,
    axes: [Vec3; 4],
}

impl ArmGeometry {
    pub fn max_reach(&self) -> f64 {
        self.upper_arm_length + self.forearm_length
    }

    pub fn min_reach(&self) -> f64 {
        (self.upper_arm_length - self.forearm_length).abs()
    }

    fn validate(&self) -> Result<(), ArmError> {
        if self.upper_arm_length > 0.0 && self.forearm_length > 0.0 && self.shoulder_origin.is_finite() {
            Ok(())
        } else {
            Err(ArmError::InvalidGeometry)
        }
    }

    fn pose(&self, q: &JointVector) -> Pose {
        let [q1, q2, q3, q4] = q.0;
        let r1 = Mat3::rot_x(q1);
        let r12 = r1.mul(&Mat3::rot_y(-q2));
        let upper = r12.mul(&Mat3::rot_z(q3));
        let fore = upper.mul(&Mat3::rot_y(-q4));
        let down = Vec3::new(0.0, 0.0, -1.0);
        let elbow = self.shoulder_origin + upper.apply(down) * self.upper_arm_length;
        let hand = elbow + fore.apply(down) * self.forearm_length;
        let axes = [
            Vec3::X,
            -r1.apply(Vec3::Y),
            r12.apply(Vec3::Z),
            -upper.apply(Vec3::Y),
        ];
        Pose { elbow, hand, axes }
    }

    fn check_limits(&self, q: &JointVector) -> Result<(), ArmError> {
        for i in 0..4 {
            let v = q.0[i];
            if !v.is_finite()
                || v < self.limits.lower[i] - JointLimits::SLACK
                || v > self.limits.upper[i] + JointLimits::SLACK
            {
                return Err(ArmError::JointLimit { joint: i + 1, value: v });
            }
        }
        Ok(())
    }

    /// Hand position for a joint configuration.
    pub fn forward_kinematics(&self, q: &JointVector) -> Result<Vec3, ArmError> {
        self.validate()?;
        self.check_limits(q)?;
        Ok(self.pose(q).hand)
    }

    /// Elbow position, mostly useful for drawing and tests.
    pub fn elbow_position(&self, q: &JointVector) -> Vec3 {
        self.pose(q).elbow
    }

    /// Positional Jacobian (3 x 4), column `j` is `d hand / d q_j`.
    pub fn jacobian(&self, q: &JointVector) -> [Vec3; 4] {
        let p = self.pose(q);
        let shoulder = self.shoulder_origin;
        [
            p.axes[0].cross(p.hand - shoulder),
            p.axes[1].cross(p.hand - shoulder),
            p.axes[2].cross(p.hand - shoulder),
            p.axes[3].cross(p.hand - p.elbow),
        ]
    }

    pub fn inverse_kinematics(&self, target: Vec3, seed: &JointVector) -> Result<JointVector, ArmError> {
        self.inverse_kinematics_with(target, seed, &IkConfig::default())
    }

    /// Damped least-squares inverse kinematics.
    ///
    /// Starts from `seed`; if that attempt stalls, retries from a fixed set
    /// of alternative seeds. The returned configuration is within limits
    /// and within `cfg.tolerance` of the target.
    pub fn inverse_kinematics_with(
        &self,
        target: Vec3,
        seed: &JointVector,
        cfg: &IkConfig,
    ) -> Result<JointVector, ArmError> {
        self.validate()?;
        if !target.is_finite() {
            return Err(ArmError::Unreachable {
                distance: f64::NAN,
                min: self.min_reach(),
                max: self.max_reach(),
            });
        }
        let distance = target.distance(self.shoulder_origin);
        if distance > self.max_reach() + 1e-12 || distance < self.min_reach() - 1e-12 {
            return Err(ArmError::Unreachable {
                distance,
                min: self.min_reach(),
                max: self.max_reach(),
            });
        }
        let start = if seed.is_finite() {
            self.limits.clamp(*seed)
        } else {
            JointVector::ZERO
        };
        let mut best = (start, f64::INFINITY);
        for s in std::iter::once(start).chain(FALLBACK_SEEDS.iter().map(|q| self.limits.clamp(JointVector(*q)))) {
            let (q, residual) = self.dls(target, s, cfg);
            if residual < cfg.tolerance {
                return Ok(q);
            }
            if residual < best.1 {
                best = (q, residual);
            }
        }
        Err(ArmError::NoConvergence { residual: best.1 })
    }

    fn dls(&self, target: Vec3, mut q: JointVector, cfg: &IkConfig) -> (JointVector, f64) {
        let lambda2 = cfg.damping * cfg.damping;
        let mut residual = f64::INFINITY;
        for _ in 0..cfg.max_iterations {
            let e = target - self.pose(&q).hand;
            residual = e.norm();
            let posture = cfg.rest.map(|rest| std::array::from_fn::<f64, 4, _>(|k| rest.0[k] - q.0[k]));
            if residual < cfg.early_exit && posture.is_none() {
                break;
            }
            let j = self.jacobian(&q);
            // A = J J^T + lambda^2 I (3 x 3, symmetric)
            let mut a = [[0.0; 3]; 3];
            for (r, row) in a.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = j.iter().map(|col| col[r] * col[c]).sum::<f64>();
                    if r == c {
                        *v += lambda2;
                    }
                }
            }
            let Some(y) = solve3(a, e) else { break };
            let mut dq: [f64; 4] = std::array::from_fn(|k| j[k].dot(y));
            if let Some(z) = posture {
                // exact projection of z onto the self-motion, skipped near singular poses
                let mut g = a;
                (0..3).for_each(|r| g[r][r] -= lambda2);
                let trace = g[0][0] + g[1][1] + g[2][2];
                let jz = j.iter().zip(&z).fold(Vec3::ZERO, |acc, (col, zk)| acc + *col * *zk);
                let null = (det3(&g) > 1e-6 * (trace / 3.0).powi(3))
                    .then(|| solve3(g, jz))
                    .flatten()
                    .map(|w| std::array::from_fn::<f64, 4, _>(|k| z[k] - j[k].dot(w)));
                let null = null.unwrap_or([0.0; 4]);
                let null_step = null.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
                if residual < cfg.early_exit && null_step < cfg.posture_tolerance {
                    break;
                }
                dq.iter_mut().zip(null).for_each(|(d, n)| *d += n);
            }
            let largest = dq.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
            if largest > cfg.max_step {
                let s = cfg.max_step / largest;
                dq.iter_mut().for_each(|d| *d *= s);
            }
            q = self.limits.clamp(JointVector(std::array::from_fn(|k| q.0[k] + dq[k])));
        }
        let residual = if residual < cfg.early_exit {
            residual
        } else {
            (target - self.pose(&q).hand).norm()
        };
        (q, residual)
    }
}

const FALLBACK_SEEDS: [[f64; 4]; 5] = [
    [0.0, 0.6, 0.0, 1.2],
    [0.5, 0.6, 0.0, 1.0],
    [-0.5, 0.6, 0.0, 1.0],
    [0.0, 1.2, 0.0, 0.5],
    [0.0, 0.2, 0.0, 2.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkConfig {
    pub damping: f64,
    /// Largest per-joint change per iteration, radians.
    pub max_step: f64,
    pub max_iterations: usize,
    /// Acceptance threshold on the final position error.
    pub tolerance: f64,
    /// Iteration stops once the error drops below this.
    pub early_exit: f64,
    /// Rest posture for resolving the arm's redundancy. When set, the
    /// iteration also moves along the self-motion toward it, so the
    /// solution depends on the target only and not on the seed history.
    pub rest: Option<JointVector>,
    /// Self-motion step below which a posture-resolved solve has settled.
    pub posture_tolerance: f64,
}

impl IkConfig {
    /// Default settings with redundancy resolved toward `rest`.
    pub fn with_rest(rest: JointVector) -> Self {
        Self {
            rest: Some(rest),
            ..Self::default()
        }
    }
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            damping: 0.05,
            max_step: 0.2,
            max_iterations: 200,
            tolerance: 1e-4,
            early_exit: 1e-7,
            rest: None,
            posture_tolerance: 1e-9,
        }
    }
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Solves a 3x3 system by Cramer's rule.
fn solve3(a: [[f64; 3]; 3], b: Vec3) -> Option<Vec3> {
    let c0 = Vec3::new(a[0][0], a[1][0], a[2][0]);
    let c1 = Vec3::new(a[0][1], a[1][1], a[2][1]);
    let c2 = Vec3::new(a[0][2], a[1][2], a[2][2]);
    let det = c0.dot(c1.cross(c2));
    if det.abs() < 1e-300 {
        return None;
    }
    Some(Vec3::new(
        b.dot(c1.cross(c2)) / det,
        c0.dot(b.cross(c2)) / det,
        c0.dot(c1.cross(b)) / det,
    ))
}

/// Inverse kinematics failure at a given sample of a path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("sample {index}: {source}")]
pub struct PathIkError {
    pub index: usize,
    pub source: ArmError,
}

/// Default IK seed for the first sample of a path: arm raised forward, elbow bent.
pub const DEFAULT_SEED: JointVector = JointVector([0.0, 0.6, 0.0, 1.2]);

/// Solves IK for every point of a path, seeding each solve with the previous
/// solution. Redundancy is resolved toward `seed` as the rest posture, so
/// two paths through the same point get the same joints there.
pub fn solve_path(g: &ArmGeometry, points: &[Vec3], seed: &JointVector) -> Result<Vec<JointVector>, PathIkError> {
    let cfg = IkConfig::with_rest(*seed);
    let mut prev = *seed;
    points
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            prev = g
                .inverse_kinematics_with(p, &prev, &cfg)
                .map_err(|source| PathIkError { index, source })?;
            Ok(prev)
        })
        .collect()
}

pub fn forward_kinematics(g: &ArmGeometry, q: &JointVector) -> Result<Vec3, ArmError> {
    g.forward_kinematics(q)
}

pub fn inverse_kinematics(g: &ArmGeometry, target: Vec3, seed: &JointVector) -> Result<JointVector, ArmError> {
    g.inverse_kinematics(target, seed)
}

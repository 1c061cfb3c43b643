use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::arm::JointVector;
use crate::geometry::{ExerciseId, Vec3};
use crate::labels::{Condition, SessionLabels};

/// Per-sample end-effector error: the Euclidean distance between the actual
/// and desired positions.
pub fn sample_rmse(actual: Vec3, desired: Vec3) -> f64 {
    let d = actual - desired;
    (d.x * d.x + d.y * d.y + d.z * d.z).sqrt()
}

/// Mean absolute per-joint angle difference.
pub fn joint_sample_error(actual: &JointVector, desired: &JointVector) -> f64 {
    actual
        .0
        .iter()
        .zip(&desired.0)
        .map(|(a, d)| (a - d).abs())
        .sum::<f64>()
        / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repetition<T> {
    pub actual: Vec<T>,
    pub desired: Vec<T>,
}

/// Time-normalized repetitions, all with the same sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSet<T> {
    reps: Vec<Repetition<T>>,
}

impl<T> RepetitionSet<T> {
    pub fn new(reps: Vec<Repetition<T>>) -> Result<Self, AnalyticsError> {
        let Some(first) = reps.first() else {
            return Err(AnalyticsError::EmptySet);
        };
        let samples = first.actual.len();
        if samples == 0 {
            return Err(AnalyticsError::EmptySet);
        }
        if reps
            .iter()
            .any(|r| r.actual.len() != samples || r.desired.len() != samples)
        {
            return Err(AnalyticsError::RaggedSet);
        }
        Ok(Self { reps })
    }

    pub fn repetitions(&self) -> &[Repetition<T>] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn samples_per_rep(&self) -> usize {
        self.reps[0].actual.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "ee")]
    EndEffector,
    #[serde(rename = "joint")]
    Joint,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::EndEffector => "ee",
            Space::Joint => "joint",
        }
    }
}

impl std::str::FromStr for Space {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ee" | "end_effector" => Ok(Space::EndEffector),
            "joint" => Ok(Space::Joint),
            _ => Err(format!("unknown space `{s}` (expected ee or joint)")),
        }
    }
}

/// Task error of one subject on one exercise in one condition.
///
/// End-effector values are meters, joint values radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub space: Space,
    pub subject: Option<String>,
    pub exercise: Option<ExerciseId>,
    pub condition: Option<Condition>,
    pub err: f64,
    pub per_rep_mean: Vec<f64>,
    pub per_sample_rmse: Vec<Vec<f64>>,
}

impl ErrorSummary {
    fn from_errors(space: Space, per_sample_rmse: Vec<Vec<f64>>) -> Self {
        let per_rep_mean: Vec<f64> = per_sample_rmse
            .iter()
            .map(|r| compensated_mean(r))
            .collect();
        let err = compensated_mean(&per_rep_mean);
        Self {
            space,
            subject: None,
            exercise: None,
            condition: None,
            err,
            per_rep_mean,
            per_sample_rmse,
        }
    }

    pub fn with_labels(mut self, labels: &SessionLabels) -> Self {
        self.subject = labels.subject.clone();
        self.exercise = labels.exercise;
        self.condition = labels.condition;
        self
    }

    /// Error in reporting units: meters for end-effector, degrees for joints.
    pub fn err_reported(&self) -> f64 {
        match self.space {
            Space::EndEffector => self.err,
            Space::Joint => self.err.to_degrees(),
        }
    }
}

/// Mean of the deviations from the first element, added back to it, with
/// Neumaier-compensated summation. A constant input returns that constant
/// exactly.
fn compensated_mean(v: &[f64]) -> f64 {
    let shift = v[0];
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in v {
        let x = x - shift;
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    shift + (sum + c) / v.len() as f64
}

/// Two-level mean of per-sample errors: over the samples of each repetition,
/// then over repetitions.
pub fn err_task(reps: &RepetitionSet<Vec3>) -> ErrorSummary {
    let per_sample = reps
        .repetitions()
        .iter()
        .map(|r| r.actual.iter().zip(&r.desired).map(|(a, d)| sample_rmse(*a, *d)).collect())
        .collect();
    ErrorSummary::from_errors(Space::EndEffector, per_sample)
}

/// Joint-space task error: the two-level mean of `|q_k - q_dk|` for every
/// joint, averaged over the four joints.
///
/// Every stage is an arithmetic mean, so averaging the joints per sample
/// first gives the same value; the per-sample list stores that joint mean.
pub fn joint_err_task(reps: &RepetitionSet<JointVector>) -> ErrorSummary {
    let per_sample = reps
        .repetitions()
        .iter()
        .map(|r| {
            r.actual
                .iter()
                .zip(&r.desired)
                .map(|(a, d)| joint_sample_error(a, d))
                .collect()
        })
        .collect();
    ErrorSummary::from_errors(Space::Joint, per_sample)
}

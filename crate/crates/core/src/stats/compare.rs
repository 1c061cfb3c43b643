//! Paired comparison of task errors between the no-feedback condition and
//! the feedback conditions.
//!
//! Input rows are `subject,exercise,condition,space,err` with `err` in
//! meters for end-effector space and degrees for joint space. Each subject's
//! errors are averaged over exercises within a condition; subjects are the
//! pairing unit.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ks_normality, mean, wilcoxon_signed_rank, KsResult, PairedSamples, StatsError, WilcoxonResult};
use crate::analytics::Space;
use crate::geometry::ExerciseId;
use crate::labels::Condition;

/// One line of the analytics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrRow {
    pub subject: String,
    pub exercise: ExerciseId,
    pub condition: Condition,
    pub space: Space,
    pub err: f64,
}

impl ErrRow {
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ErrRow>, StatsError> {
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader)
            .deserialize()
            .map(|r| r.map_err(|e: csv::Error| StatsError::Parse(e.to_string())))
            .collect()
    }

    pub fn write_csv<W: Write>(rows: &[ErrRow], writer: W) -> Result<(), StatsError> {
        let mut w = csv::Writer::from_writer(writer);
        // header is written explicitly so an empty table still has one
        w.write_record(["subject", "exercise", "condition", "space", "err"])
            .map_err(|e| StatsError::Parse(e.to_string()))?;
        for r in rows {
            w.write_record([
                r.subject.as_str(),
                r.exercise.as_str(),
                r.condition.as_str(),
                r.space.as_str(),
                &r.err.to_string(),
            ])
            .map_err(|e| StatsError::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| StatsError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionComparison {
    /// `c1`, `c2`, `c3`, or `all` for the mean over every feedback condition.
    pub condition: String,
    pub subjects: Vec<String>,
    pub no_feedback: Vec<f64>,
    pub feedback: Vec<f64>,
    pub no_feedback_mean: f64,
    pub feedback_mean: f64,
    /// Test on `no_feedback - feedback`; positive ranks mean feedback helped.
    pub wilcoxon: Option<WilcoxonResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub space: Space,
    /// Normality of the per-subject errors in each condition.
    pub normality: BTreeMap<String, Option<KsResult>>,
    pub comparisons: Vec<ConditionComparison>,
}

fn per_subject(rows: &[&ErrRow], keep: impl Fn(Condition) -> bool) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| keep(r.condition)) {
        acc.entry(r.subject.clone()).or_default().push(r.err);
    }
    acc.into_iter().map(|(s, v)| (s, mean(&v))).collect()
}

/// Compares no-feedback against each feedback condition present in `rows`
/// (restricted to `space`), and against all feedback conditions pooled.
/// Only subjects with data in both arms are paired.
pub fn compare_conditions(rows: &[ErrRow], space: Space) -> ComparisonReport {
    let rows: Vec<&ErrRow> = rows.iter().filter(|r| r.space == space).collect();
    let baseline = per_subject(&rows, |c| c == Condition::NoFeedback);

    let mut normality = BTreeMap::new();
    let mut arms: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
    for c in Condition::ALL {
        let m = per_subject(&rows, |x| x == c);
        if m.is_empty() {
            continue;
        }
        normality.insert(c.as_str().to_string(), ks_normality(&m.values().copied().collect::<Vec<_>>()).ok());
        if c != Condition::NoFeedback {
            arms.push((c.as_str().to_string(), m));
        }
    }
    if arms.len() > 1 {
        arms.push(("all".to_string(), per_subject(&rows, |c| c != Condition::NoFeedback)));
    }

    let comparisons = arms
        .into_iter()
        .map(|(condition, arm)| {
            let subjects: Vec<String> = baseline.keys().filter(|s| arm.contains_key(*s)).cloned().collect();
            let no_feedback: Vec<f64> = subjects.iter().map(|s| baseline[s]).collect();
            let feedback: Vec<f64> = subjects.iter().map(|s| arm[s]).collect();
            let test = PairedSamples::new(no_feedback.clone(), feedback.clone())
                .and_then(|p| wilcoxon_signed_rank(&p));
            let (wilcoxon, error) = match test {
                Ok(w) => (Some(w), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ConditionComparison {
                condition,
                no_feedback_mean: if subjects.is_empty() { f64::NAN } else { mean(&no_feedback) },
                feedback_mean: if subjects.is_empty() { f64::NAN } else { mean(&feedback) },
                subjects,
                no_feedback,
                feedback,
                wilcoxon,
                error,
            }
        })
        .collect();

    ComparisonReport { space, normality, comparisons }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: usize, e: ExerciseId, c: Condition, err: f64) -> ErrRow {
        ErrRow { subject: format!("s{s:02}"), exercise: e, condition: c, space: Space::EndEffector, err }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(1, ExerciseId::T4, Condition::C2, 0.0123), row(2, ExerciseId::T1, Condition::NoFeedback, 0.5)];
        let mut buf = Vec::new();
        ErrRow::write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("subject,exercise,condition,space,err\ns01,T4,c2,ee,0.0123\n"));
        assert_eq!(ErrRow::read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn subjects_average_over_exercises() {
        let mut rows = Vec::new();
        for s in 0..6 {
            for (k, e) in ExerciseId::ALL.into_iter().enumerate() {
                rows.push(row(s, e, Condition::NoFeedback, 0.03 + 0.001 * k as f64 + 0.0001 * s as f64));
                rows.push(row(s, e, Condition::C1, 0.02 + 0.001 * k as f64));
            }
        }
        let r = compare_conditions(&rows, Space::EndEffector);
        assert_eq!(r.comparisons.len(), 1);
        let c = &r.comparisons[0];
        assert_eq!(c.subjects.len(), 6);
        assert!((c.no_feedback[0] - 0.0315).abs() < 1e-15);
        let w = c.wilcoxon.as_ref().unwrap();
        assert_eq!(w.w_plus, 21.0);
        assert_eq!(w.p_value, 0.03125);
    }
}

//! Likert questionnaires: SUS scoring, Cronbach's alpha and the CSV layout
//! shared by the SUS and TAM reports.
//!
//! CSV layout: a header row naming every item, each name ending in `+`
//! (positive item) or `-` (negative item, reverse-scored); an optional
//! leading `subject` column; then one row of answers in `1..=5` per subject.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{sample_variance, StatsError};

pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 5;
pub const SUS_ITEMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// SUS score of one respondent in `[0, 100]`.
///
/// Odd-numbered items contribute `answer - 1`, even-numbered items
/// `5 - answer`; the sum is scaled by 2.5.
pub fn sus_score(answers: &[u8]) -> Result<f64, StatsError> {
    if answers.len() != SUS_ITEMS {
        return Err(StatsError::BadLength {
            got: answers.len(),
            expected: SUS_ITEMS,
        });
    }
    check_likert(answers)?;
    let sum: u32 = answers
        .iter()
        .enumerate()
        .map(|(i, &a)| if i % 2 == 0 { a as u32 - 1 } else { 5 - a as u32 })
        .sum();
    Ok(sum as f64 * 2.5)
}

fn check_likert(answers: &[u8]) -> Result<(), StatsError> {
    match answers.iter().find(|a| !(LIKERT_MIN..=LIKERT_MAX).contains(*a)) {
        Some(&value) => Err(StatsError::OutOfRange { value }),
        None => Ok(()),
    }
}

/// Subjects-by-items Likert answers with item polarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireMatrix {
    pub items: Vec<String>,
    pub polarity: Vec<Polarity>,
    pub subjects: Vec<String>,
    pub responses: Vec<Vec<u8>>,
}

impl QuestionnaireMatrix {
    pub fn new(
        items: Vec<String>,
        polarity: Vec<Polarity>,
        subjects: Vec<String>,
        responses: Vec<Vec<u8>>,
    ) -> Result<Self, StatsError> {
        if items.len() != polarity.len() {
            return Err(StatsError::LengthMismatch {
                left: items.len(),
                right: polarity.len(),
            });
        }
        if subjects.len() != responses.len() {
            return Err(StatsError::LengthMismatch {
                left: subjects.len(),
                right: responses.len(),
            });
        }
        for row in &responses {
            if row.len() != items.len() {
                return Err(StatsError::BadLength {
                    got: row.len(),
                    expected: items.len(),
                });
            }
            check_likert(row)?;
        }
        Ok(Self {
            items,
            polarity,
            subjects,
            responses,
        })
    }

    /// Builds a matrix with all-positive items and generated names.
    pub fn from_rows(responses: Vec<Vec<u8>>) -> Result<Self, StatsError> {
        let k = responses.first().map_or(0, |r| r.len());
        let items = (1..=k).map(|i| format!("Q{i}")).collect();
        let subjects = (1..=responses.len()).map(|i| format!("S{i}")).collect();
        Self::new(items, vec![Polarity::Positive; k], subjects, responses)
    }

    pub fn n_subjects(&self) -> usize {
        self.responses.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// Answers with negative items reverse-scored (`6 - a`).
    pub fn scored(&self) -> Vec<Vec<f64>> {
        self.responses
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.polarity)
                    .map(|(&a, p)| match p {
                        Polarity::Positive => a as f64,
                        Polarity::Negative => (LIKERT_MIN + LIKERT_MAX - a) as f64,
                    })
                    .collect()
            })
            .collect()
    }

    /// Restriction to the given item columns.
    pub fn select(&self, columns: &[usize]) -> QuestionnaireMatrix {
        QuestionnaireMatrix {
            items: columns.iter().map(|&c| self.items[c].clone()).collect(),
            polarity: columns.iter().map(|&c| self.polarity[c]).collect(),
            subjects: self.subjects.clone(),
            responses: self
                .responses
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
        }
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, StatsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| StatsError::Parse(e.to_string()))?.clone();
        let has_subject = headers
            .get(0)
            .is_some_and(|h| matches!(h.to_ascii_lowercase().as_str(), "subject" | "id"));
        let mut items = Vec::new();
        let mut polarity = Vec::new();
        for h in headers.iter().skip(has_subject as usize) {
            let (name, pol) = split_polarity(h)
                .ok_or_else(|| StatsError::Parse(format!("header `{h}` lacks a + or - polarity marker")))?;
            items.push(name.to_string());
            polarity.push(pol);
        }
        let mut subjects = Vec::new();
        let mut responses = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| StatsError::Parse(e.to_string()))?;
            let mut fields = rec.iter();
            let subject = if has_subject {
                fields.next().unwrap_or_default().to_string()
            } else {
                format!("S{}", line + 1)
            };
            let row = fields
                .map(|f| {
                    f.parse::<u8>()
                        .map_err(|_| StatsError::Parse(format!("row {}: `{f}` is not a Likert answer", line + 2)))
                })
                .collect::<Result<Vec<u8>, _>>()?;
            subjects.push(subject);
            responses.push(row);
        }
        Self::new(items, polarity, subjects, responses)
    }
}

fn split_polarity(header: &str) -> Option<(&str, Polarity)> {
    let h = header.trim();
    if let Some(n) = h.strip_suffix('+') {
        Some((n, Polarity::Positive))
    } else if let Some(n) = h.strip_suffix('-').or_else(|| h.strip_suffix('\u{2212}')) {
        Some((n, Polarity::Negative))
    } else {
        None
    }
}

/// Cronbach's alpha over all items (negatives reverse-scored first):
/// `k / (k - 1) * (1 - sum of item variances / variance of totals)`, with
/// n - 1 denominators.
pub fn cronbach_alpha(m: &QuestionnaireMatrix) -> Result<f64, StatsError> {
    let k = m.n_items();
    if k < 2 {
        return Err(StatsError::TooFewItems { n: k });
    }
    if m.n_subjects() < 2 {
        return Err(StatsError::TooFewSamples { n: m.n_subjects() });
    }
    let scored = m.scored();
    let item_var_sum: f64 = (0..k)
        .map(|j| sample_variance(&scored.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .sum();
    let totals: Vec<f64> = scored.iter().map(|r| r.iter().sum()).collect();
    let total_var = sample_variance(&totals);
    if total_var == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var_sum / total_var))
}

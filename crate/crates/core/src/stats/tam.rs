//! SUS and TAM reports built from a [`QuestionnaireMatrix`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{cronbach_alpha, mean, ols_regression, pearson, sample_sd, sus_score};
use super::{PearsonResult, QuestionnaireMatrix, StatsError, SUS_ITEMS};

/// Score at or above which usability counts as acceptable.
pub const SUS_ACCEPTABLE: f64 = 68.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusReport {
    pub subjects: Vec<String>,
    pub scores: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub acceptable_fraction: f64,
    pub item_means: Vec<f64>,
}

/// SUS scores for every subject. The columns are taken in order as items
/// 1..=10; their polarity markers are not used because SUS fixes them.
pub fn sus_report(m: &QuestionnaireMatrix) -> Result<SusReport, StatsError> {
    if m.n_items() != SUS_ITEMS {
        return Err(StatsError::BadLength { got: m.n_items(), expected: SUS_ITEMS });
    }
    if m.n_subjects() < 2 {
        return Err(StatsError::TooFewSamples { n: m.n_subjects() });
    }
    let scores = m
        .responses
        .iter()
        .map(|r| sus_score(r))
        .collect::<Result<Vec<_>, _>>()?;
    let item_means = (0..SUS_ITEMS)
        .map(|j| mean(&m.responses.iter().map(|r| r[j] as f64).collect::<Vec<_>>()))
        .collect();
    Ok(SusReport {
        subjects: m.subjects.clone(),
        mean: mean(&scores),
        sd: sample_sd(&scores),
        acceptable_fraction: scores.iter().filter(|s| **s >= SUS_ACCEPTABLE).count() as f64
            / scores.len() as f64,
        scores,
        item_means,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub items: Vec<String>,
    pub mean: f64,
    pub sd: f64,
    /// Absent for single-item categories.
    pub alpha: Option<f64>,
    /// Correlation of the per-subject category score with WTU.
    pub correlation_with_wtu: Option<PearsonResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub response: String,
    pub predictors: Vec<String>,
    pub coefficients: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamReport {
    pub n_subjects: usize,
    pub categories: BTreeMap<String, CategoryReport>,
    /// Per-subject category scores.
    pub scores: BTreeMap<String, Vec<f64>>,
    pub regressions: Vec<RegressionReport>,
}

/// Category of an item name: the name with trailing digits removed,
/// upper-cased (`PEOU3` becomes `PEOU`).
pub fn item_category(item: &str) -> String {
    item.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_' || c == '.')
        .to_ascii_uppercase()
}

const REGRESSIONS: [(&str, &[&str]); 2] = [("WTU", &["PU", "PEOU"]), ("PU", &["TRI", "IND", "GRAPH"])];

/// Category means (after reverse-scoring negatives), per-category alpha,
/// correlation of each category with WTU, and the two path regressions
/// `WTU ~ PU + PEOU` and `PU ~ TRI + IND + GRAPH` fitted without intercept.
/// A regression is skipped when its response is missing; missing
/// predictors are dropped from it.
pub fn tam_report(m: &QuestionnaireMatrix) -> Result<TamReport, StatsError> {
    if m.n_subjects() < 3 {
        return Err(StatsError::TooFewSamples { n: m.n_subjects() });
    }
    let mut columns: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (j, item) in m.items.iter().enumerate() {
        columns.entry(item_category(item)).or_default().push(j);
    }
    let scored = m.scored();
    let scores: BTreeMap<String, Vec<f64>> = columns
        .iter()
        .map(|(cat, cols)| {
            let per_subject = scored
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).sum::<f64>() / cols.len() as f64)
                .collect();
            (cat.clone(), per_subject)
        })
        .collect();
    let wtu = scores.get("WTU");

    let mut categories = BTreeMap::new();
    for (cat, cols) in &columns {
        let s = &scores[cat];
        let alpha = if cols.len() >= 2 {
            cronbach_alpha(&m.select(cols)).ok()
        } else {
            None
        };
        let correlation_with_wtu = match wtu {
            Some(w) if cat != "WTU" => pearson(s, w).ok(),
            _ => None,
        };
        categories.insert(
            cat.clone(),
            CategoryReport {
                items: cols.iter().map(|&c| m.items[c].clone()).collect(),
                mean: mean(s),
                sd: sample_sd(s),
                alpha,
                correlation_with_wtu,
            },
        );
    }

    let mut regressions = Vec::new();
    for (response, wanted) in REGRESSIONS {
        let Some(y) = scores.get(response) else { continue };
        let predictors: Vec<&str> = wanted.iter().copied().filter(|p| scores.contains_key(*p)).collect();
        if predictors.is_empty() {
            continue;
        }
        let x: Vec<Vec<f64>> = (0..m.n_subjects())
            .map(|i| predictors.iter().map(|p| scores[*p][i]).collect())
            .collect();
        let fit = ols_regression(&x, y, false)?;
        regressions.push(RegressionReport {
            response: response.to_string(),
            predictors: predictors.iter().map(|p| p.to_string()).collect(),
            coefficients: fit.coefficients,
            p_values: fit.p_values,
            r_squared: fit.r_squared,
        });
    }

    Ok(TamReport {
        n_subjects: m.n_subjects(),
        categories,
        scores,
        regressions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_strip_digits() {
        assert_eq!(item_category("PEOU3"), "PEOU");
        assert_eq!(item_category("graph12"), "GRAPH");
        assert_eq!(item_category("WTU"), "WTU");
    }

    #[test]
    fn negative_items_are_reversed_before_averaging() {
        let text = "subject,WTU1+,WTU2-,PU1+,PU2+\n\
                    a,5,1,4,5\n\
                    b,4,2,4,4\n\
                    c,3,3,2,3\n\
                    d,5,2,5,4\n";
        let m = QuestionnaireMatrix::from_csv(text.as_bytes()).unwrap();
        let r = tam_report(&m).unwrap();
        assert_eq!(r.scores["WTU"], vec![5.0, 4.0, 3.0, 4.5]);
        assert_eq!(r.categories["PU"].mean, (4.5 + 4.0 + 2.5 + 4.5) / 4.0);
        assert!(r.categories["PU"].correlation_with_wtu.is_some());
        assert_eq!(r.regressions.len(), 1);
        assert_eq!(r.regressions[0].predictors, vec!["PU"]);
    }

    #[test]
    fn sus_report_over_cohort() {
        let m = QuestionnaireMatrix::from_rows(vec![
            vec![5, 1, 5, 1, 5, 1, 5, 1, 5, 1],
            vec![3; 10],
            vec![4, 2, 4, 2, 4, 2, 4, 2, 4, 2],
        ])
        .unwrap();
        let r = sus_report(&m).unwrap();
        assert_eq!(r.scores, vec![100.0, 50.0, 75.0]);
        assert_eq!(r.mean, 75.0);
        assert_eq!(r.sd, 25.0);
        assert!((r.acceptable_fraction - 2.0 / 3.0).abs() < 1e-15);
    }
}

//! Study statistics: normality check, paired nonparametric test,
//! questionnaire scoring, correlation and least squares.

mod compare;
mod correlation;
mod ks;
mod ols;
mod questionnaire;
mod tam;
mod wilcoxon;

pub use compare::{compare_conditions, ComparisonReport, ConditionComparison, ErrRow};
pub use correlation::{pearson, PearsonResult};
pub use ks::{kolmogorov_p, ks_normality, ks_one_sample, ks_statistic, KsResult, KS_MIN_SAMPLES};
pub use ols::{ols_regression, OlsResult};
pub use questionnaire::{
    cronbach_alpha, sus_score, Polarity, QuestionnaireMatrix, LIKERT_MAX, LIKERT_MIN, SUS_ITEMS,
};
pub use tam::{sus_report, tam_report, CategoryReport, RegressionReport, SusReport, TamReport};
pub use wilcoxon::{wilcoxon_signed_rank, PMethod, PairedSamples, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least 5 non-zero paired differences, got {n}")]
    TooFewPairs { n: usize },
    #[error("too few samples ({n})")]
    TooFewSamples { n: usize },
    #[error("need at least 2 items, got {n}")]
    TooFewItems { n: usize },
    #[error("zero variance")]
    DegenerateVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("expected {expected} values, got {got}")]
    BadLength { got: usize, expected: usize },
    #[error("answer {value} is outside 1..=5")]
    OutOfRange { value: u8 },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{0}")]
    Parse(String),
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with an n - 1 denominator.
pub(crate) fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    sample_variance(v).sqrt()
}

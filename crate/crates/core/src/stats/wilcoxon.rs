use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::StatsError;

/// Largest number of non-zero differences for which the p-value is exact.
pub const EXACT_MAX_N: usize = 12;

/// Paired observations, e.g. one subject's error in two conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSamples {
    pub const MIN_PAIRS: usize = 5;

    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.len() < Self::MIN_PAIRS {
            return Err(StatsError::TooFewPairs { n: x.len() });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn differences(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero differences used.
    pub n: usize,
    /// Sum of ranks of positive differences (`x > y`); the reported statistic.
    pub w_plus: f64,
    pub w_minus: f64,
    /// `w_plus - w_minus`; flips sign when the samples are swapped.
    pub signed_rank_sum: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: PMethod,
}

impl WilcoxonResult {
    pub fn statistic(&self) -> f64 {
        self.w_plus
    }
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Wilcoxon signed-rank test on `x - y`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. For
/// up to [`EXACT_MAX_N`] differences the two-sided p-value comes from
/// enumerating every sign assignment of the observed ranks; above that a
/// normal approximation with tie-corrected variance and continuity
/// correction is used.
pub fn wilcoxon_signed_rank(p: &PairedSamples) -> Result<WilcoxonResult, StatsError> {
    let diffs: Vec<f64> = p.differences().into_iter().filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n < PairedSamples::MIN_PAIRS {
        return Err(StatsError::TooFewPairs { n });
    }
    let mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&mags);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;

    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w_plus), PMethod::Exact)
    } else {
        (normal_p(&ranks, w_plus), PMethod::NormalApprox)
    };
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        signed_rank_sum: w_plus - w_minus,
        p_value,
        method,
    })
}

fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    // ranks are multiples of 1/2, so doubled ranks are exact integers
    let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
    let observed = (w_plus * 2.0).round() as u64;
    let n = ranks.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * le.min(ge) as f64 / total).min(1.0)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(f64::MIN_POSITIVE, 1.0)
}

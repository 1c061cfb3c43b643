use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{mean, sample_sd, StatsError};

pub const KS_MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    /// `sup |F_empirical - F_reference|`.
    pub d: f64,
    /// Asymptotic Kolmogorov p-value.
    pub p_value: f64,
    /// True when the reference parameters were estimated from the sample;
    /// the p-value is then only approximate (no Lilliefors correction).
    pub approximate: bool,
}

/// One-sample Kolmogorov-Smirnov statistic against an arbitrary CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// One-sample KS test against a fully specified distribution.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, StatsError> {
    check_sample(sample)?;
    let d = ks_statistic(sample, cdf);
    Ok(KsResult {
        n: sample.len(),
        d,
        p_value: kolmogorov_p(d, sample.len()),
        approximate: false,
    })
}

/// KS test against a normal with the sample's mean and standard deviation.
pub fn ks_normality(sample: &[f64]) -> Result<KsResult, StatsError> {
    check_sample(sample)?;
    let sd = sample_sd(sample);
    if !(sd > 0.0) {
        return Err(StatsError::DegenerateVariance);
    }
    let normal = Normal::new(mean(sample), sd).map_err(|_| StatsError::DegenerateVariance)?;
    let d = ks_statistic(sample, |x| normal.cdf(x));
    Ok(KsResult {
        n: sample.len(),
        d,
        p_value: kolmogorov_p(d, sample.len()),
        approximate: true,
    })
}

fn check_sample(sample: &[f64]) -> Result<(), StatsError> {
    if sample.len() < KS_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { n: sample.len() });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Upper tail of the Kolmogorov distribution at the effective statistic
/// `(sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d`.
pub fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_q(lambda).clamp(0.0, 1.0)
}

fn kolmogorov_q(lambda: f64) -> f64 {
    use std::f64::consts::PI;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-lambda form converges quickly here
        let pre = (2.0 * PI).sqrt() / lambda;
        let s: f64 = (1..=50)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-(m * m) * PI * PI / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        1.0 - pre * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        2.0 * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::Continuous;

    #[test]
    fn plotting_positions_give_half_step() {
        let n = 40;
        let std = Normal::new(0.0, 1.0).unwrap();
        let sample: Vec<f64> = (1..=n)
            .map(|i| {
                let q = (i as f64 - 0.5) / n as f64;
                let mut x = std.inverse_cdf(q);
                for _ in 0..3 {
                    x -= (std.cdf(x) - q) / std.pdf(x);
                }
                x
            })
            .collect();
        let r = ks_one_sample(&sample, |x| std.cdf(x)).unwrap();
        assert!((r.d - 0.5 / n as f64).abs() < 1e-12, "{} {}", r.d, 0.5 / n as f64);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert_eq!(ks_normality(&[2.0; 10]).unwrap_err(), StatsError::DegenerateVariance);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(ks_normality(&[1.0, 2.0]).unwrap_err(), StatsError::TooFewSamples { n: 2 });
    }

    #[test]
    fn series_branches_agree_at_switch() {
        let a = kolmogorov_q(1.18 - 1e-9);
        let b = kolmogorov_q(1.18 + 1e-9);
        // reference values of the Kolmogorov tail from scipy.special.kolmogorov
        assert!((a - 0.1234538094297657).abs() < 1e-8, "{a}");
        assert!((b - 0.1234538094297657).abs() < 1e-8, "{b}");
        assert!((kolmogorov_q(1.36) - 0.049485876755377876).abs() < 1e-12);
    }
}

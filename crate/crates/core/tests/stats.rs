mod common;

use common::{data_path, enumerated_signed_rank_p, signed_ranks};
use holotunnel::stats::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn diffs_test(d: &[f64]) -> WilcoxonResult {
    let y = vec![0.0; d.len()];
    wilcoxon_signed_rank(&PairedSamples::new(d.to_vec(), y).unwrap()).unwrap()
}

#[test]
fn all_positive_differences_give_two_over_two_to_the_n() {
    for n in 5..=10 {
        let d: Vec<f64> = (1..=n).map(|k| k as f64 * 0.1).collect();
        let r = diffs_test(&d);
        assert_eq!(r.method, PMethod::Exact);
        assert_eq!(r.p_value, 2.0 / 2f64.powi(n as i32));
        let (ranks, w) = signed_ranks(&d);
        assert_eq!(r.p_value, enumerated_signed_rank_p(&ranks, w));
    }
    for n in 1..5 {
        let d: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let p = PairedSamples::new(d.clone(), vec![0.0; n]);
        assert!(matches!(p, Err(StatsError::TooFewPairs { .. })));
    }
}

#[test]
fn textbook_cases() {
    // depression scale before and after therapy, nine patients
    let x = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30];
    let y = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29];
    let r = wilcoxon_signed_rank(&PairedSamples::new(x.to_vec(), y.to_vec()).unwrap()).unwrap();
    assert_eq!(r.w_plus, 40.0);
    assert_eq!(r.w_minus, 5.0);
    assert!((r.p_value - 0.0390625).abs() < 1e-15);

    let d = [0.9, -1.7, 2.2, 3.1, -0.4, 4.6, 5.3, -6.2, 7.5, 8.1];
    let r = diffs_test(&d);
    assert_eq!(r.w_minus, 12.0);
    assert!((r.p_value - 0.130859375).abs() < 1e-15);

    let d = [-3.5, 1.2, 2.4, 4.1, 5.0, -0.6, 6.3, 7.7, 8.2, 9.9, 10.5, -11.4];
    let r = diffs_test(&d);
    assert_eq!(r.w_minus, 17.0);
    assert!((r.p_value - 0.09228515625).abs() < 1e-15);

    for case in [
        x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>(),
        vec![0.9, -1.7, 2.2, 3.1, -0.4, 4.6, 5.3, -6.2, 7.5, 8.1],
        vec![1.0, 1.0, -2.0, 3.0, 3.0, 3.0, -4.0, 5.0],
    ] {
        let (ranks, w) = signed_ranks(&case);
        let r = diffs_test(&case);
        assert_eq!(r.w_plus, w);
        assert!((r.p_value - enumerated_signed_rank_p(&ranks, w)).abs() < 1e-12);
    }
}

#[test]
fn normal_approximation_tracks_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let d: Vec<f64> = (0..13).map(|_| rng.random_range(-1.0..2.0)).collect();
        let r = diffs_test(&d);
        assert_eq!(r.method, PMethod::NormalApprox);
        let (ranks, w) = signed_ranks(&d);
        assert!((r.p_value - enumerated_signed_rank_p(&ranks, w)).abs() < 0.02);
    }
}

proptest! {
    #[test]
    fn swapping_negates_and_keeps_p(x in prop::collection::vec(-5.0..5.0f64, 5..30), seed in 0u64..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|_| rng.random_range(-5.0..5.0)).collect();
        let p = PairedSamples::new(x, y).unwrap();
        let a = wilcoxon_signed_rank(&p).unwrap();
        let b = wilcoxon_signed_rank(&p.swapped()).unwrap();
        prop_assert_eq!(a.signed_rank_sum, -b.signed_rank_sum);
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        prop_assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn pearson_is_affine_invariant(
        x in prop::collection::vec(-10.0..10.0f64, 5..40),
        a in 0.1..10.0f64, b in -5.0..5.0f64, sign in prop::bool::ANY,
    ) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * v - i as f64).collect();
        prop_assume!(pearson(&x, &y).is_ok());
        let r = pearson(&x, &y).unwrap().r;
        let s = if sign { 1.0 } else { -1.0 };
        let moved: Vec<f64> = x.iter().map(|v| s * a * v + b).collect();
        let r2 = pearson(&moved, &y).unwrap().r;
        prop_assert!((r2 - s * r).abs() < 1e-9);
    }
}

#[test]
fn ks_matches_step_scan_on_uniform_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let sample: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
    let cdf = |x: f64| x.clamp(0.0, 1.0);
    // evaluate the empirical CDF just before and at every sample point
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for &x in &sample {
        let at = sample.iter().filter(|v| **v <= x).count() as f64 / n;
        let before = sample.iter().filter(|v| **v < x).count() as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((before - cdf(x)).abs());
    }
    assert!((ks_statistic(&sample, cdf) - d).abs() < 1e-12);
    let r = ks_one_sample(&sample, cdf).unwrap();
    assert!(r.p_value > 0.05);
    assert!(matches!(ks_normality(&[1.0; 10]), Err(StatsError::DegenerateVariance)));
}

#[test]
fn cronbach_worked_matrix() {
    let m = QuestionnaireMatrix::from_rows(vec![vec![4, 5, 3, 4], vec![2, 3, 2, 3], vec![5, 4, 4, 5]]).unwrap();
    assert!((cronbach_alpha(&m).unwrap() - 12.0 / 13.0).abs() < 1e-12);
}

#[test]
fn independent_answers_have_alpha_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rows: Vec<Vec<u8>> = (0..3000).map(|_| (0..8).map(|_| rng.random_range(1..=5)).collect()).collect();
    let alpha = cronbach_alpha(&QuestionnaireMatrix::from_rows(rows).unwrap()).unwrap();
    assert!(alpha.abs() < 0.1, "alpha {alpha}");
}

#[test]
fn sus_cohort_moments() {
    let m = QuestionnaireMatrix::from_csv(std::fs::File::open(data_path("sus_cohort.csv")).unwrap()).unwrap();
    let r = sus_report(&m).unwrap();
    assert_eq!(r.scores.len(), 15);
    assert!((r.mean - 67.7).abs() < 0.1, "mean {}", r.mean);
    assert!((r.sd - 12.1).abs() < 0.1, "sd {}", r.sd);
    assert_eq!(sus_score(&[5, 1, 5, 1, 5, 1, 5, 1, 5, 1]).unwrap(), 100.0);
    assert_eq!(sus_score(&[3; 10]).unwrap(), 50.0);
}

#[test]
fn ols_recovers_noiseless_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random_range(1.0..5.0), rng.random_range(1.0..5.0)]).collect();
    let y: Vec<f64> = x.iter().map(|r| 0.73 * r[0] + 0.35 * r[1]).collect();
    let fit = ols_regression(&x, &y, false).unwrap();
    assert!((fit.coefficients[0] - 0.73).abs() < 1e-9);
    assert!((fit.coefficients[1] - 0.35).abs() < 1e-9);
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.random_range(10..60);
        let k = rng.random_range(1..5);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fit = ols_regression(&x, &y, true).unwrap();
        let design = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
        let yv = DVector::from_vec(y);
        let xtx = design.transpose() * &design;
        let beta = xtx.clone().lu().solve(&(design.transpose() * &yv)).unwrap();
        for j in 0..=k {
            assert!((fit.coefficients[j] - beta[j]).abs() < 1e-9);
        }
        let resid = &yv - &design * &beta;
        let sigma2 = resid.norm_squared() / (n - k - 1) as f64;
        let inv = xtx.try_inverse().unwrap();
        for j in 0..=k {
            assert!((fit.std_errors[j] - (sigma2 * inv[(j, j)]).sqrt()).abs() < 1e-9);
        }
    }
}

use conformal_c2st::baselines::{
    c2st_test_sampled, sbc_ranks, sbc_test, tarp_coverages, tarp_test, SbcConfig, TarpConfig,
};
use conformal_c2st::classifier::FnScore;
use conformal_c2st::numerics::{ks_statistic, RngStream};
use conformal_c2st::tasks::{GaussianTask, JointSample, PerturbationKind};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn task(kind: PerturbationKind, gamma: f64) -> GaussianTask<f64> {
    GaussianTask::new(kind, gamma).unwrap()
}

#[test]
fn sbc_ranks_are_uniform_under_exact_posterior() {
    let draws = 20;
    let ranks = sbc_ranks(
        &task(PerturbationKind::CovScaling, 0.0),
        34_000,
        draws,
        RngStream::new(1, 1),
    );
    let mut counts = vec![0usize; draws + 1];
    for r in ranks.iter().flatten() {
        counts[*r] += 1;
    }
    let n: usize = counts.iter().sum();
    assert!(n >= 100_000);
    let expected = n as f64 / (draws + 1) as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(draws as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi-square p = {p}");
}

#[test]
fn tarp_coverage_is_uniform_under_exact_posterior() {
    let cfg = TarpConfig::new(50, 0.05);
    let cov = tarp_coverages(
        &task(PerturbationKind::MeanShift, 0.0),
        10_000,
        &cfg,
        RngStream::new(2, 2),
    )
    .unwrap();
    let d = ks_statistic(&cov).unwrap();
    // 99% KS band at n = 10⁴
    assert!(d < 1.63 / 100.0, "D = {d}");
}

#[test]
fn c2st_null_statistic_is_standard_normal() {
    // θ₁ ~ N(1, 2) under the null, so thresholding at 1 predicts each class
    // half the time, which is what the asymptotic null assumes
    let score = FnScore(|x: &JointSample<f64>| x.theta[0] - 1.0);
    let t = task(PerturbationKind::CovScaling, 0.0);
    let z: Vec<f64> = (0..2000)
        .map(|i| {
            c2st_test_sampled(&score, &t, 500, 0.05, RngStream::new(3, i))
                .unwrap()
                .statistic
        })
        .collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.07, "mean {mean}");
    assert!((var - 1.0).abs() < 0.15, "var {var}");
}

#[test]
fn sbc_bonferroni_controls_the_level() {
    let t = task(PerturbationKind::Anisotropic, 0.0);
    let cfg = SbcConfig::new(50, 0.05);
    let trials = 400;
    let rejections = (0..trials)
        .filter(|&i| {
            sbc_test(&t, 200, &cfg, RngStream::new(4, i))
                .unwrap()
                .reject
        })
        .count();
    let rate = rejections as f64 / trials as f64;
    assert!(
        rate <= 0.05 + 3.0 * (0.05f64 * 0.95 / trials as f64).sqrt(),
        "rate {rate}"
    );
}

#[test]
fn sbc_detects_mode_collapse() {
    let t = task(PerturbationKind::ModeCollapse, 0.4);
    let cfg = SbcConfig::new(200, 0.05);
    let rejections = (0..20)
        .filter(|&i| {
            sbc_test(&t, 200, &cfg, RngStream::new(5, i))
                .unwrap()
                .reject
        })
        .count();
    assert!(rejections >= 18, "{rejections}/20");
}

#[test]
fn tarp_detects_strong_covariance_scaling() {
    let t = task(PerturbationKind::CovScaling, 1.0);
    let cfg = TarpConfig::new(200, 0.05);
    let rejections = (0..20)
        .filter(|&i| {
            tarp_test(&t, 200, &cfg, RngStream::new(6, i))
                .unwrap()
                .reject
        })
        .count();
    assert!(rejections >= 10, "{rejections}/20");
}

#[test]
fn explicit_tarp_center_must_match_dimension() {
    let mut cfg = TarpConfig::new(10, 0.05);
    cfg.reference = conformal_c2st::baselines::TarpReference::Gaussian {
        center: Some(vec![0.0]),
        variance: 2.0,
    };
    assert!(tarp_test(
        &task(PerturbationKind::MeanShift, 0.0),
        10,
        &cfg,
        RngStream::new(0, 0)
    )
    .is_err());
}

mod common;

use cheshire_core::cheshire::{cheshire_parameter, max_family};
use cheshire_core::hilbert::{BlochAxis, PureState};
use cheshire_core::sampler::{
    apply_readout_noise, estimate_cheshire, sample_trials, write_trials_csv, BranchSampler, SamplerConfig, TrialRecord,
};
use cheshire_core::statistics::Component;
use cheshire_core::{Experiment, GaussianMeter};
use common::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided Kolmogorov-Smirnov critical value at α = 0.001, times √n.
const KS_CRITICAL: f64 = 1.949;

fn max_exp(eps_tilde: f64) -> Experiment {
    let (psi, phi) = max_family(c(1.0, 0.0), c(0.0, 0.0), 0.0, &BlochAxis::z()).unwrap();
    let m = GaussianMeter::pure(eps_tilde).unwrap();
    Experiment::pure(&psi, &phi, BlochAxis::z(), m, m).unwrap()
}

/// Marginal CDF of one readout under a signed Gaussian mixture.
fn marginal_cdf(comps: &[Component], eps: f64, axis_x: bool) -> impl Fn(f64) -> f64 + '_ {
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    let n = Normal::new(0.0, 1.0).unwrap();
    move |v| {
        comps
            .iter()
            .map(|c| c.weight * n.cdf((v - if axis_x { c.center.0 } else { c.center.1 }) * eps))
            .sum::<f64>()
            / total
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn check_marginals(exp: &Experiment, samples: &[(f64, f64)]) {
    let comps = exp.components();
    let n = samples.len() as f64;
    let dx = ks_statistic(samples.iter().map(|s| s.0).collect(), marginal_cdf(&comps, exp.meter_x().epsilon(), true));
    let dy = ks_statistic(samples.iter().map(|s| s.1).collect(), marginal_cdf(&comps, exp.meter_y().epsilon(), false));
    assert!(dx * n.sqrt() < KS_CRITICAL, "x: D√n = {}", dx * n.sqrt());
    assert!(dy * n.sqrt() < KS_CRITICAL, "y: D√n = {}", dy * n.sqrt());
}

#[test]
fn million_trials_hit_the_maximum() {
    let exp = max_exp(0.5);
    let run = sample_trials(&exp, &SamplerConfig::new(1_000_000, 2024).unwrap()).unwrap();
    let est = estimate_cheshire(&run.records).unwrap();
    let target = 0.25 * exp.w_x() * exp.w_y();
    assert!((est.estimate - target).abs() < 4.0 * est.std_error, "{} vs {target} ± {}", est.estimate, est.std_error);
    let p = exp.p_postselect();
    let frac = run.records.iter().filter(|r| r.postselected).count() as f64 / 1e6;
    assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / 1e6).sqrt());
}

#[test]
fn identical_seed_gives_identical_file() {
    let exp = max_exp(0.5);
    let cfg = SamplerConfig::new(20_000, 99).unwrap();
    let write = || {
        let mut buf = Vec::new();
        write_trials_csv(&sample_trials(&exp, &cfg).unwrap().records, &mut buf).unwrap();
        buf
    };
    assert_eq!(write(), write());
}

#[test]
fn branch_marginals_pass_ks() {
    let mut r = rng(41);
    for _ in 0..5 {
        let e = random_experiment(&mut r);
        let run = sample_trials(&e, &SamplerConfig::new(50_000, 5).unwrap()).unwrap();
        let succ: Vec<_> = run.records.iter().filter(|t| t.postselected).map(|t| (t.x, t.y)).collect();
        check_marginals(&e, &succ);
        if let Ok(comp) = e.complement() {
            let fail: Vec<_> = run.records.iter().filter(|t| !t.postselected).map(|t| (t.x, t.y)).collect();
            check_marginals(&comp, &fail);
        }
    }
}

#[test]
fn grid_fallback_matches_law() {
    let mut r = rng(42);
    for _ in 0..3 {
        let e = random_experiment(&mut r);
        let s = BranchSampler::with_grid(&e);
        assert!(s.uses_grid());
        let samples: Vec<_> = (0..50_000).map(|_| s.sample(&mut r)).collect();
        check_marginals(&e, &samples);
    }
}

#[test]
fn heavy_cancellation_switches_to_grid() {
    let s = |a: [f64; 4]| PureState::new(a.map(|v| c(v, 0.0))).unwrap();
    let (psi, phi) = (s([1.0; 4]), s([1.0, 1.0, -0.01, -2.01]));
    let m = GaussianMeter::pure(0.1).unwrap();
    let e = Experiment::pure(&psi, &phi, BlochAxis::z(), m, m).unwrap();
    let sampler = BranchSampler::new(&e);
    assert!(sampler.acceptance() < 0.01, "{}", sampler.acceptance());
    assert!(sampler.uses_grid());
    let mut r = rng(43);
    let samples: Vec<_> = (0..50_000).map(|_| sampler.sample(&mut r)).collect();
    check_marginals(&e, &samples);
}

#[test]
fn estimator_is_unbiased() {
    let mut r = rng(44);
    let e = random_experiment(&mut r);
    let truth = cheshire_parameter(&e).c_total;
    let estimates: Vec<f64> = (0..200)
        .map(|k| estimate_cheshire(&sample_trials(&e, &SamplerConfig::new(10_000, 1000 + k).unwrap()).unwrap().records).unwrap().estimate)
        .collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let sd = (estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - truth).abs() < 4.0 * sd / n.sqrt(), "{mean} vs {truth}");
}

#[test]
fn readout_noise_adds_variance_without_bias() {
    let exp = max_exp(0.5);
    let run = sample_trials(&exp, &SamplerConfig::new(200_000, 3).unwrap()).unwrap();
    let (nu_x, nu_y) = (0.7, 0.4);
    let noisy = apply_readout_noise(&run.records, nu_x, nu_y, 3).unwrap();
    let n = noisy.len() as f64;
    let var = |f: &dyn Fn(&(TrialRecord, TrialRecord)) -> f64| {
        let v: Vec<f64> = run.records.iter().copied().zip(noisy.iter().copied()).map(|p| f(&p)).collect();
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let vx = var(&|(a, b)| b.x - a.x);
    let vy = var(&|(a, b)| b.y - a.y);
    assert!((vx - nu_x * nu_x).abs() < 5.0 * nu_x * nu_x * (2.0 / n).sqrt());
    assert!((vy - nu_y * nu_y).abs() < 5.0 * nu_y * nu_y * (2.0 / n).sqrt());

    let clean = estimate_cheshire(&run.records).unwrap();
    let dirty = estimate_cheshire(&noisy).unwrap();
    assert!(dirty.std_error > clean.std_error);
    let target = 0.25 * exp.w_x() * exp.w_y();
    assert!((dirty.estimate - target).abs() < 4.0 * dirty.std_error);

    // Through the config path the same seed gives the same noisy records.
    let cfg = SamplerConfig::new(200_000, 3).unwrap().with_noise(nu_x, nu_y);
    assert_eq!(sample_trials(&exp, &cfg).unwrap().records, noisy);
}

#![allow(dead_code)]

use cheshire_core::hilbert::{BlochAxis, PureState, SystemOperator};
use cheshire_core::{Experiment, GaussianMeter};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss_vec(r: &mut ChaCha8Rng) -> Vector4<Complex64> {
    Vector4::from_fn(|_, _| c(r.sample(StandardNormal), r.sample(StandardNormal)))
}

pub fn random_state(r: &mut ChaCha8Rng) -> PureState {
    PureState::from_vector(gauss_vec(r)).unwrap()
}

pub fn random_axis(r: &mut ChaCha8Rng) -> BlochAxis {
    let theta = (1.0 - 2.0 * r.random::<f64>()).acos();
    BlochAxis::from_angles(theta, 2.0 * PI * r.random::<f64>()).unwrap()
}

/// Random orthonormal basis by Gram-Schmidt.
fn random_basis(r: &mut ChaCha8Rng) -> [Vector4<Complex64>; 4] {
    let mut out: Vec<Vector4<Complex64>> = Vec::new();
    while out.len() < 4 {
        let mut v = gauss_vec(r);
        for u in &out {
            let p = u.dotc(&v);
            v -= u * p;
        }
        let n = v.norm();
        if n > 1e-6 {
            out.push(v / c(n, 0.0));
        }
    }
    [out[0], out[1], out[2], out[3]]
}

fn spectral(basis: &[Vector4<Complex64>; 4], eig: [f64; 4]) -> SystemOperator {
    let mut m = Matrix4::zeros();
    for (v, l) in basis.iter().zip(eig) {
        m += v * v.adjoint() * c(l, 0.0);
    }
    // Symmetrize away rounding so the Hermiticity check sees exact zeros.
    SystemOperator::new((m + m.adjoint()) * c(0.5, 0.0))
}

/// Mixed state of random rank.
pub fn random_density(r: &mut ChaCha8Rng) -> SystemOperator {
    let basis = random_basis(r);
    let rank = r.random_range(1..=4);
    let mut w = [0.0; 4];
    for slot in w.iter_mut().take(rank) {
        *slot = r.random::<f64>() + 0.05;
    }
    let s: f64 = w.iter().sum();
    spectral(&basis, w.map(|x| x / s))
}

/// POVM element with spectrum in [0, 1].
pub fn random_effect(r: &mut ChaCha8Rng) -> SystemOperator {
    let basis = random_basis(r);
    spectral(&basis, [r.random(), r.random(), r.random(), r.random()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeterKind {
    Strong,
    WeakCoherent,
    WeakIncoherent,
    Intermediate,
}

pub const ALL_KINDS: [MeterKind; 4] =
    [MeterKind::Strong, MeterKind::WeakCoherent, MeterKind::WeakIncoherent, MeterKind::Intermediate];

/// Random meter in a regime. Strong meters stay within ε ≤ 14 so a 1/16 grid
/// still integrates them to 1e-10.
pub fn random_meter(r: &mut ChaCha8Rng, kind: MeterKind) -> GaussianMeter {
    match kind {
        MeterKind::Strong => {
            let e = 10.0 + 4.0 * r.random::<f64>();
            GaussianMeter::new(e, e * (1.0 + r.random::<f64>() * 0.3)).unwrap()
        }
        MeterKind::WeakCoherent => {
            let e = 0.08 + 0.02 * r.random::<f64>();
            GaussianMeter::pure(e).unwrap()
        }
        MeterKind::WeakIncoherent => GaussianMeter::new(0.08 + 0.02 * r.random::<f64>(), 10.0 + 3.0 * r.random::<f64>()).unwrap(),
        MeterKind::Intermediate => {
            let e = 0.3 + 1.7 * r.random::<f64>();
            GaussianMeter::new(e, e * (1.0 + 2.0 * r.random::<f64>())).unwrap()
        }
    }
}

/// Meter with ε, ε̃ in moderate ranges, suitable for direct quadrature.
pub fn moderate_meter(r: &mut ChaCha8Rng) -> GaussianMeter {
    let e = 0.4 + 2.6 * r.random::<f64>();
    GaussianMeter::new(e, e * (1.0 + 3.0 * r.random::<f64>())).unwrap()
}

/// Random experiment: pure or mixed, random axis, given meters.
pub fn random_experiment_with(r: &mut ChaCha8Rng, mx: GaussianMeter, my: GaussianMeter) -> Experiment {
    loop {
        let axis = random_axis(r);
        let e = if r.random::<bool>() {
            Experiment::pure(&random_state(r), &random_state(r), axis, mx, my)
        } else {
            Experiment::new(random_density(r), random_effect(r), axis, mx, my)
        };
        if let Ok(e) = e {
            if e.p_postselect() > 1e-3 {
                return e;
            }
        }
    }
}

pub fn random_experiment(r: &mut ChaCha8Rng) -> Experiment {
    let mx = moderate_meter(r);
    let my = moderate_meter(r);
    random_experiment_with(r, mx, my)
}

/// Trapezoid rule over a rectangle; spectrally accurate for Gaussian tails.
pub fn trapezoid_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), n: usize) -> f64 {
    let (hx, hy) = ((x.1 - x.0) / n as f64, (y.1 - y.0) / n as f64);
    let mut total = 0.0;
    for i in 0..=n {
        let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
        let xi = x.0 + i as f64 * hx;
        for j in 0..=n {
            let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
            total += wx * wy * f(xi, y.0 + j as f64 * hy);
        }
    }
    total * hx * hy
}

/// Integration box covering all mixture centres plus `k` spreads.
pub fn support(exp: &Experiment, k: f64) -> ((f64, f64), (f64, f64)) {
    let sx = k / exp.meter_x().epsilon();
    let sy = k / exp.meter_y().epsilon();
    ((-sx, 1.0 + sx), (-1.0 - sy, 1.0 + sy))
}

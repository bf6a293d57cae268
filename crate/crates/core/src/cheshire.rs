//! The Cheshire-cat indicator `C(E_f) = ⟨xy⟩ P{E_f}`.
//!
//! Its theoretical value is `(w_X w_Y / 2) Re Tr[E_f σ_R ρ_i Π_L]`. The
//! complementary post-selection `1 − E_f` gives exactly `−C(E_f)`, and the
//! signed per-trial product estimates `C = 2 C(E_f)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{pi_l, sigma_r, BlochAxis, PureState};
use crate::statistics::{moments, Experiment};

/// Default reading of "much smaller than" for the noise criterion.
pub const DEFAULT_NOISE_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheshireReport {
    /// `C(E_f)` from the trace form.
    pub c_of_ef: f64,
    /// `⟨xy⟩·P{E_f}` from the moment engine; equals `c_of_ef`.
    pub c_operational: f64,
    /// `C = 2 C(E_f)`.
    pub c_total: f64,
    pub cross_xy: f64,
    pub p_postselect: f64,
    pub w_x: f64,
    pub w_y: f64,
    /// Set by [`noise_check`] when noise levels are known.
    pub noise_ok: Option<bool>,
}

impl CheshireReport {
    /// Largest value `C` can take for these meters.
    pub fn c_max(&self) -> f64 {
        0.25 * self.w_x * self.w_y
    }
}

/// `(w_X w_Y / 2) Re Tr[E_f σ_R ρ_i Π_L]`, computed directly from the operators.
pub fn cheshire_trace_form(exp: &Experiment) -> f64 {
    let s = sigma_r(exp.axis());
    let prod = &(&(exp.effect() * &s) * exp.rho_i()) * &pi_l();
    0.5 * exp.w_x() * exp.w_y() * prod.trace().re
}

pub fn cheshire_parameter(exp: &Experiment) -> CheshireReport {
    let mom = moments(exp);
    let c_of_ef = cheshire_trace_form(exp);
    CheshireReport {
        c_of_ef,
        c_operational: mom.cross_xy * mom.p_postselect,
        c_total: 2.0 * c_of_ef,
        cross_xy: mom.cross_xy,
        p_postselect: mom.p_postselect,
        w_x: exp.w_x(),
        w_y: exp.w_y(),
        noise_ok: None,
    }
}

/// `(C(E_f), C(1 − E_f))`.
pub fn complement_identity(exp: &Experiment) -> Result<(f64, f64)> {
    let comp = exp.complement()?;
    Ok((cheshire_trace_form(exp), cheshire_trace_form(&comp)))
}

/// The preparation/post-selection pair attaining `C = w_X w_Y / 4`:
/// `|Ψ⟩ = (a/√2)|L,+⟩ + (b/√2)|L,−⟩ + e^{iφ}½|R,+⟩ + ½|R,−⟩`, and `|Φ⟩` the
/// same with the sign of the `|R,−⟩` term flipped.
pub fn max_family(a: Complex64, b: Complex64, phi: f64, axis: &BlochAxis) -> Result<(PureState, PureState)> {
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("|a|^2 + |b|^2 must be 1, got {norm}")));
    }
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&phi) {
        return Err(Error::InvalidArgument(format!("phase must lie in [0, 2π], got {phi}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(0.5, phi);
    let half = Complex64::new(0.5, 0.0);
    let psi = PureState::from_eigen_components([a * h, b * h, e, half], axis)?;
    let phi_state = PureState::from_eigen_components([a * h, b * h, e, -half], axis)?;
    Ok((psi, phi_state))
}

/// Outcome of the readout-noise criterion `ν_x ν_y ≪ C`, `ν ≪ w/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseDiagnostics {
    pub margin: f64,
    /// `ν_x ν_y / |C|`
    pub product_ratio: f64,
    /// `ν_x / (w_X / 2)`
    pub x_ratio: f64,
    /// `ν_y / (w_Y / 2)`
    pub y_ratio: f64,
    pub passed: bool,
}

/// `ν` is the standard deviation of additive Gaussian readout noise. "≪" is
/// read as a factor `margin` (see [`DEFAULT_NOISE_MARGIN`]).
pub fn noise_check(report: &CheshireReport, nu_x: f64, nu_y: f64, w_x: f64, w_y: f64, margin: f64) -> Result<NoiseDiagnostics> {
    if !(nu_x >= 0.0 && nu_y >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise levels must be non-negative, got ({nu_x}, {nu_y})")));
    }
    let product = nu_x * nu_y;
    let c = report.c_total.abs();
    let product_ratio = if product == 0.0 { 0.0 } else { product / c };
    let x_ratio = nu_x / (0.5 * w_x);
    let y_ratio = nu_y / (0.5 * w_y);
    let bound = 1.0 / margin;
    let passed = product_ratio <= bound && x_ratio < bound && y_ratio < bound;
    Ok(NoiseDiagnostics { margin, product_ratio, x_ratio, y_ratio, passed })
}

impl CheshireReport {
    pub fn with_noise(mut self, nu_x: f64, nu_y: f64, margin: f64) -> Result<(Self, NoiseDiagnostics)> {
        let d = noise_check(&self, nu_x, nu_y, self.w_x, self.w_y, margin)?;
        self.noise_ok = Some(d.passed);
        Ok((self, d))
    }
}

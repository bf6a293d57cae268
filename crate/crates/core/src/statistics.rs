//! Exact readout statistics for arbitrary coupling strength.
//!
//! Every quantity is evaluated from the unnormalized traces in
//! [`WeakTraces`], so one code path covers pure and mixed preparation and
//! post-selection as well as exactly orthogonal pairs (where the weak values
//! themselves do not exist but the statistics are finite).
//!
//! The conditional readout density is a signed mixture of six bivariate
//! Gaussians, all with the initial meter widths `1/ε_X`, `1/ε_Y`:
//!
//! | centre        | weight                          |
//! |---------------|---------------------------------|
//! | `(1, 0)`      | `L_2w`                          |
//! | `(0, ±1)`     | `(R_2w + Σ_2w ± 2 Re N_w) / 4`  |
//! | `(½, ±½)`     | `w_X w_Y Re(Q_w ± M_w)`         |
//! | `(0, 0)`      | `w_Y⁴ (R_2w − Σ_2w) / 2`        |
//!
//! The last three weights can be negative; the sum never is.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{complement, validate, BlochAxis, PureState, Role, SystemOperator};
use crate::meters::{classify_regime, w_factor, GaussianMeter, Regime};
use crate::weakvalues::{matrix_elements, MatrixElements, WeakTraces, WeakValueSet};

/// Post-selection probabilities (and normalizations) at or below this are
/// rejected as unpost-selectable.
pub const MIN_POSTSELECTION: f64 = 1e-12;

/// Preparation, post-selection, polarization axis and the two meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    rho_i: SystemOperator,
    effect: SystemOperator,
    axis: BlochAxis,
    meter_x: GaussianMeter,
    meter_y: GaussianMeter,
    pure: Option<(PureState, PureState)>,
    traces: WeakTraces,
    p_postselect: f64,
}

impl Experiment {
    pub fn new(
        rho_i: SystemOperator,
        effect: SystemOperator,
        axis: BlochAxis,
        meter_x: GaussianMeter,
        meter_y: GaussianMeter,
    ) -> Result<Self> {
        let d = validate(&rho_i, Role::Density);
        if !d.passed() {
            return Err(Error::InvalidOperator { role: "density matrix", reason: d.failures.join("; ") });
        }
        let d = validate(&effect, Role::Povm);
        if !d.passed() {
            return Err(Error::InvalidOperator { role: "POVM element", reason: d.failures.join("; ") });
        }
        let traces = WeakTraces::compute(&rho_i, &effect, &axis);
        let p = postselection_weight(&traces, w_factor(&meter_x), w_factor(&meter_y));
        if !(p > MIN_POSTSELECTION) {
            return Err(Error::ZeroPostselection { value: p });
        }
        Ok(Self { rho_i, effect, axis, meter_x, meter_y, pure: None, traces, p_postselect: p })
    }

    /// Pure preparation `|Ψ⟩` and post-selection `|Φ⟩`.
    pub fn pure(
        psi: &PureState,
        phi: &PureState,
        axis: BlochAxis,
        meter_x: GaussianMeter,
        meter_y: GaussianMeter,
    ) -> Result<Self> {
        let mut exp = Self::new(psi.projector(), phi.projector(), axis, meter_x, meter_y)?;
        exp.pure = Some((psi.clone(), phi.clone()));
        Ok(exp)
    }

    pub fn with_meters(&self, meter_x: GaussianMeter, meter_y: GaussianMeter) -> Result<Self> {
        let mut exp = Self::new(self.rho_i.clone(), self.effect.clone(), self.axis, meter_x, meter_y)?;
        exp.pure = self.pure.clone();
        Ok(exp)
    }

    /// Same preparation and meters, post-selected on `1 − E_f`.
    pub fn complement(&self) -> Result<Self> {
        Self::new(self.rho_i.clone(), complement(&self.effect)?, self.axis, self.meter_x, self.meter_y)
    }

    pub fn rho_i(&self) -> &SystemOperator {
        &self.rho_i
    }

    pub fn effect(&self) -> &SystemOperator {
        &self.effect
    }

    pub fn axis(&self) -> &BlochAxis {
        &self.axis
    }

    pub fn meter_x(&self) -> &GaussianMeter {
        &self.meter_x
    }

    pub fn meter_y(&self) -> &GaussianMeter {
        &self.meter_y
    }

    pub fn pure_states(&self) -> Option<(&PureState, &PureState)> {
        self.pure.as_ref().map(|(a, b)| (a, b))
    }

    pub fn traces(&self) -> &WeakTraces {
        &self.traces
    }

    pub fn w_x(&self) -> f64 {
        w_factor(&self.meter_x)
    }

    pub fn w_y(&self) -> f64 {
        w_factor(&self.meter_y)
    }

    /// Fails for (near-)orthogonal pairs; see [`Experiment::matrix_elements`].
    pub fn weak_values(&self) -> Result<WeakValueSet> {
        let scale = self.effect.max_abs_entry() * self.rho_i.max_abs_entry();
        if self.traces.is_orthogonal(scale) {
            return Err(Error::NearOrthogonal { overlap: self.traces.total });
        }
        self.traces.normalized()
    }

    /// Available when the experiment was built from pure states.
    pub fn matrix_elements(&self) -> Option<MatrixElements> {
        self.pure.as_ref().map(|(psi, phi)| matrix_elements(psi, phi, &self.axis))
    }

    pub fn regimes(&self) -> (Regime, Regime) {
        (classify_regime(&self.meter_x), classify_regime(&self.meter_y))
    }

    /// The six signed Gaussian components of the post-selected readout law,
    /// unnormalized (they sum to `P{E_f}`).
    pub fn components(&self) -> [Component; 6] {
        mixture_components(&self.traces, self.w_x(), self.w_y())
    }

    pub fn p_postselect(&self) -> f64 {
        self.p_postselect
    }

    /// `N`, or `None` when `Tr[E_f ρ_i]` vanishes.
    pub fn normalization(&self) -> Option<f64> {
        let scale = self.effect.max_abs_entry() * self.rho_i.max_abs_entry();
        if self.traces.is_orthogonal(scale) {
            None
        } else {
            Some(self.p_postselect / self.traces.total)
        }
    }
}

/// One term of the readout mixture: `weight · G(x − cx; 1/ε_X) G(y − cy; 1/ε_Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub weight: f64,
    pub center: (f64, f64),
}

pub fn mixture_components(t: &WeakTraces, w_x: f64, w_y: f64) -> [Component; 6] {
    let (r2, s2, n, q, m) = (t.r2(), t.sigma2, t.n(), t.q(), t.m);
    let wxwy = w_x * w_y;
    let wy4 = w_y.powi(4);
    [
        Component { weight: t.l2, center: (1.0, 0.0) },
        Component { weight: (r2 + s2 + 2.0 * n.re) / 4.0, center: (0.0, 1.0) },
        Component { weight: (r2 + s2 - 2.0 * n.re) / 4.0, center: (0.0, -1.0) },
        Component { weight: wxwy * (q + m).re, center: (0.5, 0.5) },
        Component { weight: wxwy * (q - m).re, center: (0.5, -0.5) },
        Component { weight: wy4 * (r2 - s2) / 2.0, center: (0.0, 0.0) },
    ]
}

/// `Tr[E_f ρ_i]·N = Tr[E_f ρ_i] − ½(1 − w_Y⁴)(R_2 − Σ_2) − 2(1 − w_X w_Y) Re Q` in trace form.
fn postselection_weight(t: &WeakTraces, w_x: f64, w_y: f64) -> f64 {
    t.total - 0.5 * (1.0 - w_y.powi(4)) * (t.r2() - t.sigma2) - 2.0 * (1.0 - w_x * w_y) * t.q().re
}

fn check_w(w: f64, name: &str) -> Result<()> {
    if w > 0.0 && w <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1], got {w}")))
    }
}

/// `N = 1 − ½(1 − w_Y⁴)[R_2w − Σ_2w] − 2(1 − w_X w_Y) Re Q_w`.
pub fn normalization(wv: &WeakValueSet, w_x: f64, w_y: f64) -> Result<f64> {
    check_w(w_x, "w_x")?;
    check_w(w_y, "w_y")?;
    let n = postselection_weight(&wv.as_traces(), w_x, w_y);
    if !(n > MIN_POSTSELECTION) {
        return Err(Error::ZeroPostselection { value: n });
    }
    Ok(n)
}

/// `P{E_f} = Tr[E_f ρ_i]·N`.
pub fn postselection_probability(exp: &Experiment) -> f64 {
    exp.p_postselect
}

fn gaussian(u: f64, eps: f64) -> f64 {
    eps / (2.0 * PI).sqrt() * (-0.5 * eps * eps * u * u).exp()
}

/// Conditional readout density `P{x, y | E_f}`.
pub fn joint_density(exp: &Experiment, x: f64, y: f64) -> f64 {
    let (ex, ey) = (exp.meter_x.epsilon(), exp.meter_y.epsilon());
    exp.components()
        .iter()
        .map(|c| c.weight * gaussian(x - c.center.0, ex) * gaussian(y - c.center.1, ey))
        .sum::<f64>()
        / exp.p_postselect
}

/// Initial meter characteristic function `Z₀ = exp[−½(χ²/ε_X² + η²/ε_Y²)]`.
pub fn char_function_initial(meter_x: &GaussianMeter, meter_y: &GaussianMeter, chi: f64, eta: f64) -> f64 {
    let (ex, ey) = (meter_x.epsilon(), meter_y.epsilon());
    (-0.5 * (chi * chi / (ex * ex) + eta * eta / (ey * ey))).exp()
}

/// `Z(χ, η) = ⟨exp[i(χx + ηy)]⟩` of the conditional readout law.
pub fn char_function(exp: &Experiment, chi: f64, eta: f64) -> Complex64 {
    let z0 = char_function_initial(&exp.meter_x, &exp.meter_y, chi, eta);
    let comps = exp.components();
    let sum: Complex64 = comps.iter().map(|c| Complex64::from_polar(c.weight, chi * c.center.0 + eta * c.center.1)).sum();
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    sum * z0 / total
}

/// Post-selected readout moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean_x: f64,
    pub mean_y: f64,
    pub cross_xy: f64,
    pub cross_xy2: f64,
    /// `N`; absent when the preparation/post-selection overlap vanishes.
    pub norm_n: Option<f64>,
    pub p_postselect: f64,
}

/// Closed-form moments:
/// `⟨x⟩ = N⁻¹[w_X w_Y Re L_w + (1 − w_X w_Y) L_2w]`,
/// `⟨y⟩ = N⁻¹[Re Σ_w − (1 − w_X w_Y) Re M_w]`,
/// `⟨xy⟩ = N⁻¹ (w_X w_Y / 2) Re M_w`,
/// `⟨xy²⟩ = ⟨x⟩/ε_Y² + (w_X w_Y / 4N) Re Q_w`.
pub fn moments(exp: &Experiment) -> MomentReport {
    let t = &exp.traces;
    let p = exp.p_postselect;
    let wxwy = exp.w_x() * exp.w_y();
    let ey = exp.meter_y.epsilon();
    let mean_x = (wxwy * t.l.re + (1.0 - wxwy) * t.l2) / p;
    let mean_y = (t.sigma.re - (1.0 - wxwy) * t.m.re) / p;
    let cross_xy = 0.5 * wxwy * t.m.re / p;
    let cross_xy2 = mean_x / (ey * ey) + 0.25 * wxwy * t.q().re / p;
    MomentReport { mean_x, mean_y, cross_xy, cross_xy2, norm_n: exp.normalization(), p_postselect: p }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitRegime {
    /// Both pointers incoherent (`w_X, w_Y → 0`), resolved or not.
    Strong,
    /// Path pointer strong (`w_X → 0`), polarization pointer coherent (`w_Y → 1`).
    StrongCatWeakGrin,
    /// Both pointers coherent (`w_X, w_Y → 1`).
    WeakCoherent,
    /// Orthogonal or nearly orthogonal pure pair at finite `w`.
    AlmostOrthogonal,
}

impl LimitRegime {
    pub const ALL: [LimitRegime; 4] =
        [LimitRegime::Strong, LimitRegime::StrongCatWeakGrin, LimitRegime::WeakCoherent, LimitRegime::AlmostOrthogonal];
}

#[derive(Debug, Clone, Copy)]
pub enum LimitInput<'a> {
    WeakValues(&'a WeakValueSet),
    MatrixElements(&'a MatrixElements),
}

/// Limiting moments. `normalization` is `N` for the weak-value regimes and
/// `P{Φ}` for the almost-orthogonal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitMoments {
    pub regime: LimitRegime,
    pub mean_x: f64,
    pub mean_y: f64,
    pub cross_xy: f64,
    pub normalization: f64,
}

pub fn limit_moments(regime: LimitRegime, input: LimitInput<'_>, w_x: f64, w_y: f64) -> Result<LimitMoments> {
    let finish = |mean_x, mean_y, cross_xy, normalization| LimitMoments { regime, mean_x, mean_y, cross_xy, normalization };
    match (regime, input) {
        (LimitRegime::Strong, LimitInput::WeakValues(wv)) => {
            let n = 1.0 - 0.5 * (wv.r_2w - wv.sigma_2w) - 2.0 * wv.q_w.re;
            if !(n > MIN_POSTSELECTION) {
                return Err(Error::ZeroPostselection { value: n });
            }
            Ok(finish(wv.l_2w / n, wv.n_w.re / n, 0.0, n))
        }
        (LimitRegime::StrongCatWeakGrin, LimitInput::WeakValues(wv)) => {
            let n = 1.0 - 2.0 * wv.q_w.re;
            if !(n > MIN_POSTSELECTION) {
                return Err(Error::ZeroPostselection { value: n });
            }
            Ok(finish(wv.l_2w / n, wv.n_w.re / n, 0.0, n))
        }
        (LimitRegime::WeakCoherent, LimitInput::WeakValues(wv)) => {
            Ok(finish(wv.l_w.re, wv.sigma_w.re, 0.5 * wv.m_w.re, 1.0))
        }
        (LimitRegime::AlmostOrthogonal, LimitInput::MatrixElements(me)) => {
            check_w(w_x, "w_x")?;
            check_w(w_y, "w_y")?;
            let wxwy = w_x * w_y;
            let (l2, s2) = (me.l_w.norm_sqr(), me.sigma_w.norm_sqr());
            let ls = (me.l_w.conj() * me.sigma_w).re;
            let p = 2.0 * (1.0 - wxwy) * l2 - 0.5 * (1.0 - w_y.powi(4)) * (l2 - s2);
            if !(p > MIN_POSTSELECTION * l2.max(s2).max(1.0)) {
                return Err(Error::Divergent { overlap_sq: me.overlap.norm_sqr() });
            }
            Ok(finish((1.0 - wxwy) * l2 / p, -(1.0 - wxwy) * ls / p, 0.5 * wxwy * ls / p, p))
        }
        (regime, _) => Err(Error::InvalidArgument(format!("input kind does not match limit regime {regime:?}"))),
    }
}

/// Exact-vs-limit residuals along a sequence of meters approaching a regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConsistency {
    pub regime: LimitRegime,
    /// `((ε_X, ε̃_X), (ε_Y, ε̃_Y))` per step.
    pub settings: Vec<((f64, f64), (f64, f64))>,
    pub residuals: Vec<f64>,
}

impl LimitConsistency {
    pub fn is_monotone(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-15)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

const WEAK_STEPS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
const STRONG_STEPS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
const ORTHOGONAL_STEPS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Drives both meters toward `regime` in four steps (pure meters, `ε = ε̃`)
/// and records the largest deviation of `⟨x⟩`, `⟨y⟩`, `⟨xy⟩` from
/// [`limit_moments`]. For the almost-orthogonal case the limit formulas are
/// evaluated at each step's `w`, so the residual should vanish at every step.
pub fn limit_consistency(exp: &Experiment, regime: LimitRegime) -> Result<LimitConsistency> {
    let steps: Vec<(f64, f64)> = match regime {
        LimitRegime::Strong => STRONG_STEPS.iter().map(|&e| (e, e)).collect(),
        LimitRegime::WeakCoherent => WEAK_STEPS.iter().map(|&e| (e, e)).collect(),
        LimitRegime::StrongCatWeakGrin => STRONG_STEPS.iter().copied().zip(WEAK_STEPS).collect(),
        LimitRegime::AlmostOrthogonal => ORTHOGONAL_STEPS.iter().map(|&e| (e, e)).collect(),
    };
    let mut settings = Vec::with_capacity(steps.len());
    let mut residuals = Vec::with_capacity(steps.len());
    for (ex, ey) in steps {
        let (mx, my) = (GaussianMeter::pure(ex)?, GaussianMeter::pure(ey)?);
        let e = exp.with_meters(mx, my)?;
        let exact = moments(&e);
        let limit = match regime {
            LimitRegime::AlmostOrthogonal => {
                let me = e.matrix_elements().ok_or_else(|| {
                    Error::InvalidArgument("almost-orthogonal limit needs a pure experiment".into())
                })?;
                limit_moments(regime, LimitInput::MatrixElements(&me), e.w_x(), e.w_y())?
            }
            _ => {
                let wv = e.weak_values()?;
                limit_moments(regime, LimitInput::WeakValues(&wv), e.w_x(), e.w_y())?
            }
        };
        let r = (exact.mean_x - limit.mean_x)
            .abs()
            .max((exact.mean_y - limit.mean_y).abs())
            .max((exact.cross_xy - limit.cross_xy).abs());
        settings.push(((ex, ex), (ey, ey)));
        residuals.push(r);
    }
    Ok(LimitConsistency { regime, settings, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::c;

    fn state(a: [(f64, f64); 4]) -> PureState {
        PureState::new(a.map(|(re, im)| c(re, im))).unwrap()
    }

    fn two_arm() -> (PureState, PureState) {
        (state([(2.0, 0.0), (2.0, 0.0), (3.0, 0.0), (-2.0, 0.0)]), state([(1.0, 0.0); 4]))
    }

    #[test]
    fn unit_w_gives_unit_normalization() {
        let wv = WeakValueSet::from_pure(c(3.0, -2.0), c(-1.5, 0.25));
        assert!((normalization(&wv, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_arm_normalizations() {
        let wv = WeakValueSet::from_pure(c(0.8, 0.0), c(1.0, 0.0));
        // w_X → 0, w_Y → 1; the lower bound of (0, 1] stands in for the limit.
        let tiny = f64::MIN_POSITIVE;
        assert!((normalization(&wv, tiny, 1.0).unwrap() - 17.0 / 25.0).abs() < 1e-14);
        assert!((normalization(&wv, tiny, tiny).unwrap() - 29.0 / 25.0).abs() < 1e-14);
        assert!(normalization(&wv, 0.0, 1.0).is_err());
    }

    #[test]
    fn components_sum_to_probability() {
        let (psi, phi) = two_arm();
        let e = Experiment::pure(&psi, &phi, BlochAxis::z(), GaussianMeter::new(0.7, 1.3).unwrap(), GaussianMeter::new(0.4, 2.0).unwrap())
            .unwrap();
        let sum: f64 = e.components().iter().map(|c| c.weight).sum();
        assert!((sum - e.p_postselect()).abs() < 1e-14);
    }

    #[test]
    fn char_function_origin_and_symmetry() {
        let (psi, phi) = two_arm();
        let e = Experiment::pure(&psi, &phi, BlochAxis::z(), GaussianMeter::new(0.7, 1.3).unwrap(), GaussianMeter::pure(0.4).unwrap())
            .unwrap();
        let z = char_function(&e, 0.0, 0.0);
        assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        let a = char_function(&e, 0.37, -1.2);
        let b = char_function(&e, -0.37, 1.2);
        assert!((a - b.conj()).norm() < 1e-14);
    }

    #[test]
    fn left_eigenstate_without_postselection_is_one_gaussian() {
        let l = state([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let (mx, my) = (GaussianMeter::new(0.8, 1.1).unwrap(), GaussianMeter::pure(1.5).unwrap());
        let e = Experiment::new(l.projector(), SystemOperator::identity(), BlochAxis::z(), mx, my).unwrap();
        for (x, y) in [(1.0, 0.0), (0.2, -0.4), (2.5, 1.0)] {
            let expect = gaussian(x - 1.0, 0.8) * gaussian(y, 1.5);
            assert!((joint_density(&e, x, y) - expect).abs() < 1e-15);
        }
        let z = char_function(&e, 0.6, -0.3);
        let expect = Complex64::from_polar(char_function_initial(&mx, &my, 0.6, -0.3), 0.6);
        assert!((z - expect).norm() < 1e-15);
        assert!((postselection_probability(&e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_arm_limits() {
        let wv = WeakValueSet::from_pure(c(0.8, 0.0), c(1.0, 0.0));
        let m = limit_moments(LimitRegime::StrongCatWeakGrin, LimitInput::WeakValues(&wv), 0.0, 1.0).unwrap();
        assert!((m.mean_x - 16.0 / 17.0).abs() < 1e-12);
        assert!((m.mean_y - 5.0 / 17.0).abs() < 1e-12);
        assert_eq!(m.cross_xy, 0.0);

        let m = limit_moments(LimitRegime::WeakCoherent, LimitInput::WeakValues(&wv), 1.0, 1.0).unwrap();
        assert!((m.mean_x - 0.8).abs() < 1e-15);
        assert!((m.mean_y - 1.0).abs() < 1e-15);
        assert!((m.cross_xy - 0.4).abs() < 1e-15);
    }

    #[test]
    fn strong_limit_left_arm() {
        let wv = WeakValueSet::from_pure(c(1.0, 0.0), c(0.0, 0.0));
        let m = limit_moments(LimitRegime::Strong, LimitInput::WeakValues(&wv), 0.0, 0.0).unwrap();
        assert_eq!((m.mean_x, m.mean_y, m.cross_xy), (1.0, 0.0, 0.0));
    }

    #[test]
    fn mismatched_limit_input() {
        let wv = WeakValueSet::from_pure(c(1.0, 0.0), c(0.0, 0.0));
        assert!(limit_moments(LimitRegime::AlmostOrthogonal, LimitInput::WeakValues(&wv), 0.5, 0.5).is_err());
    }

    #[test]
    fn almost_orthogonal_divergence_is_reported() {
        let me = MatrixElements { l_w: c(0.5, 0.0), sigma_w: c(0.3, 0.1), overlap: c(0.0, 0.0) };
        assert!(matches!(
            limit_moments(LimitRegime::AlmostOrthogonal, LimitInput::MatrixElements(&me), 1.0, 1.0),
            Err(Error::Divergent { .. })
        ));
        assert!(limit_moments(LimitRegime::AlmostOrthogonal, LimitInput::MatrixElements(&me), 0.9, 0.9).is_ok());
    }

    #[test]
    fn identity_postselection_has_no_cross_moment() {
        let (psi, _) = two_arm();
        let e = Experiment::new(
            psi.projector(),
            SystemOperator::identity(),
            BlochAxis::z(),
            GaussianMeter::pure(0.3).unwrap(),
            GaussianMeter::pure(0.3).unwrap(),
        )
        .unwrap();
        assert!(moments(&e).cross_xy.abs() < 1e-15);
        let c = e.components();
        assert!(c[3].weight.abs() < 1e-15 && c[4].weight.abs() < 1e-15);
    }

    #[test]
    fn zero_postselection_rejected() {
        let l = state([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let r = state([(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let m = GaussianMeter::pure(1.0).unwrap();
        assert!(matches!(Experiment::pure(&l, &r, BlochAxis::z(), m, m), Err(Error::ZeroPostselection { .. })));
    }
}

//! Weak values of `Π_L`, `Π_R`, `σ_R` and their second-order relatives.
//!
//! Five quantities are independent (`L_w`, `Σ_w`, `M_w` complex; `L_2w`,
//! `Σ_2w` real). `R_w`, `R_2w`, `Q_w`, `N_w` follow from
//! `Π_L + Π_R = 1` and are filled in from those identities.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{pi_l, sigma_r, BlochAxis, PureState, SystemOperator};

/// Relative threshold on `|Tr[E_f ρ_i]|` below which a pair counts as orthogonal.
pub const ORTHOGONALITY_THRESHOLD: f64 = 1e-14;

/// Unnormalized traces `Tr[E_f A ρ_i B]`. Dividing by [`WeakTraces::total`]
/// gives a [`WeakValueSet`]; keeping them unnormalized lets the statistics
/// stay finite when `Tr[E_f ρ_i]` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakTraces {
    /// `Tr[E_f ρ_i]`
    pub total: f64,
    /// `Tr[E_f Π_L ρ_i]`
    pub l: Complex64,
    /// `Tr[E_f σ_R ρ_i]`
    pub sigma: Complex64,
    /// `Tr[E_f Π_L ρ_i Π_L]`
    pub l2: f64,
    /// `Tr[E_f σ_R ρ_i σ_R]`
    pub sigma2: f64,
    /// `Tr[E_f σ_R ρ_i Π_L]`
    pub m: Complex64,
}

impl WeakTraces {
    pub fn compute(rho_i: &SystemOperator, effect: &SystemOperator, axis: &BlochAxis) -> Self {
        let (pl, s) = (pi_l(), sigma_r(axis));
        let tr = |a: &SystemOperator| a.trace();
        let e_rho = effect * rho_i;
        let e_pl = effect * &pl;
        let e_s = effect * &s;
        Self {
            total: tr(&e_rho).re,
            l: tr(&(&e_pl * rho_i)),
            sigma: tr(&(&e_s * rho_i)),
            l2: tr(&(&(&e_pl * rho_i) * &pl)).re,
            sigma2: tr(&(&(&e_s * rho_i) * &s)).re,
            m: tr(&(&(&e_s * rho_i) * &pl)),
        }
    }

    /// `Tr[E_f Π_R ρ_i] = Tr[E_f ρ_i] − Tr[E_f Π_L ρ_i]`
    pub fn r(&self) -> Complex64 {
        Complex64::new(self.total, 0.0) - self.l
    }

    /// `Tr[E_f Π_R ρ_i Π_R]`
    pub fn r2(&self) -> f64 {
        self.total - 2.0 * self.l.re + self.l2
    }

    /// `Tr[E_f Π_L ρ_i Π_R]`
    pub fn q(&self) -> Complex64 {
        self.l - self.l2
    }

    /// `Tr[E_f σ_R ρ_i Π_R]`
    pub fn n(&self) -> Complex64 {
        self.sigma - self.m
    }

    pub fn is_orthogonal(&self, scale: f64) -> bool {
        self.total.abs() < ORTHOGONALITY_THRESHOLD * scale
    }

    pub fn normalized(&self) -> Result<WeakValueSet> {
        if self.total.abs() < ORTHOGONALITY_THRESHOLD {
            return Err(Error::NearOrthogonal { overlap: self.total });
        }
        let t = self.total;
        let l2 = self.l2 / t;
        let lw = self.l / t;
        let sw = self.sigma / t;
        let mw = self.m / t;
        Ok(WeakValueSet {
            l_w: lw,
            r_w: Complex64::new(1.0, 0.0) - lw,
            sigma_w: sw,
            l_2w: l2,
            r_2w: 1.0 - 2.0 * lw.re + l2,
            sigma_2w: self.sigma2 / t,
            m_w: mw,
            n_w: sw - mw,
            q_w: lw - l2,
        })
    }
}

/// Full weak-value family. Redundant members satisfy the linear identities
/// exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueSet {
    pub l_w: Complex64,
    pub r_w: Complex64,
    pub sigma_w: Complex64,
    pub l_2w: f64,
    pub r_2w: f64,
    pub sigma_2w: f64,
    pub m_w: Complex64,
    pub n_w: Complex64,
    pub q_w: Complex64,
}

impl WeakValueSet {
    /// Pure preparation and post-selection: `L_2w = |L_w|²`, `Σ_2w = |Σ_w|²`, `M_w = L_w* Σ_w`.
    pub fn from_pure(l_w: Complex64, sigma_w: Complex64) -> Self {
        let l_2w = l_w.norm_sqr();
        let m_w = l_w.conj() * sigma_w;
        Self {
            l_w,
            r_w: Complex64::new(1.0, 0.0) - l_w,
            sigma_w,
            l_2w,
            r_2w: 1.0 - 2.0 * l_w.re + l_2w,
            sigma_2w: sigma_w.norm_sqr(),
            m_w,
            n_w: sigma_w - m_w,
            q_w: l_w - l_2w,
        }
    }

    /// The set viewed as traces with `Tr[E_f ρ_i] = 1`.
    pub fn as_traces(&self) -> WeakTraces {
        WeakTraces { total: 1.0, l: self.l_w, sigma: self.sigma_w, l2: self.l_2w, sigma2: self.sigma_2w, m: self.m_w }
    }
}

/// Raw matrix elements for (almost) orthogonal pure pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixElements {
    /// `⟨Φ|Π_L|Ψ⟩`
    pub l_w: Complex64,
    /// `⟨Φ|σ_R|Ψ⟩`
    pub sigma_w: Complex64,
    /// `⟨Φ|Ψ⟩`
    pub overlap: Complex64,
}

pub fn weak_values_general(
    rho_i: &SystemOperator,
    effect: &SystemOperator,
    axis: &BlochAxis,
) -> Result<WeakValueSet> {
    let traces = WeakTraces::compute(rho_i, effect, axis);
    let scale = (effect * rho_i).max_abs_entry();
    if traces.is_orthogonal(scale) {
        return Err(Error::NearOrthogonal { overlap: traces.total });
    }
    traces.normalized()
}

pub fn weak_values_pure(psi: &PureState, phi: &PureState, axis: &BlochAxis) -> Result<WeakValueSet> {
    let me = matrix_elements(psi, phi, axis);
    if me.overlap.norm_sqr() < ORTHOGONALITY_THRESHOLD {
        return Err(Error::NearOrthogonal { overlap: me.overlap.norm_sqr() });
    }
    Ok(WeakValueSet::from_pure(me.l_w / me.overlap, me.sigma_w / me.overlap))
}

pub fn matrix_elements(psi: &PureState, phi: &PureState, axis: &BlochAxis) -> MatrixElements {
    MatrixElements {
        l_w: phi.matrix_element(&pi_l(), psi),
        sigma_w: phi.matrix_element(&sigma_r(axis), psi),
        overlap: phi.inner(psi),
    }
}

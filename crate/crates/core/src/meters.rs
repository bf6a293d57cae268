//! Gaussian pointer states and measurement-regime classification.
//!
//! Readouts are in normalized units (`x = X/a`, `y = Y/b`), so an ideal
//! strong measurement puts the path pointer at 0 or 1 and the polarization
//! pointer at 0 or ±1.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Slack allowed on the uncertainty constraint `ε ≤ ε̃`.
const UNCERTAINTY_SLACK: f64 = 1e-12;

/// `Δ_x = 1/ε` at or below this is a resolved (strong) readout.
pub const STRONG_SPREAD: f64 = 0.1;
/// `κ = 1/ε̃` at or above this is a coherent pointer.
pub const COHERENT_LENGTH: f64 = 10.0;
/// `Δ_x` at or above this is an unresolved readout.
pub const WEAK_SPREAD: f64 = 10.0;
/// `κ` at or below this is an incoherent pointer.
pub const INCOHERENT_LENGTH: f64 = 0.1;

/// Zero-mean Gaussian pointer with kernel
/// `ρ(x,x') = (ε/√2π) exp[−ε²(x+x')²/8 − ε̃²(x−x')²/8]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeter {
    epsilon: f64,
    epsilon_tilde: f64,
}

impl GaussianMeter {
    pub fn new(epsilon: f64, epsilon_tilde: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidMeter(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if !(epsilon_tilde.is_finite() && epsilon_tilde > 0.0) {
            return Err(Error::InvalidMeter(format!(
                "epsilon_tilde must be positive and finite, got {epsilon_tilde}"
            )));
        }
        if epsilon > epsilon_tilde * (1.0 + UNCERTAINTY_SLACK) {
            return Err(Error::InvalidMeter(format!(
                "uncertainty principle requires epsilon <= epsilon_tilde ({epsilon} > {epsilon_tilde})"
            )));
        }
        Ok(Self { epsilon, epsilon_tilde })
    }

    /// Minimum-uncertainty (pure) pointer, `ε = ε̃`.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_tilde(&self) -> f64 {
        self.epsilon_tilde
    }

    /// Initial readout spread `Δ = 1/ε`.
    pub fn spread(&self) -> f64 {
        1.0 / self.epsilon
    }

    /// Coherence length `κ = 1/ε̃`.
    pub fn coherence_length(&self) -> f64 {
        1.0 / self.epsilon_tilde
    }

    pub fn ln_w(&self) -> f64 {
        ln_w_from_epsilon_tilde(self.epsilon_tilde)
    }

    pub fn is_pure(&self) -> bool {
        (self.epsilon - self.epsilon_tilde).abs() <= UNCERTAINTY_SLACK * self.epsilon_tilde
    }
}

pub fn meter_density(m: &GaussianMeter, x: f64, xp: f64) -> f64 {
    let (s, d) = (x + xp, x - xp);
    let e2 = m.epsilon * m.epsilon;
    let t2 = m.epsilon_tilde * m.epsilon_tilde;
    m.epsilon / (2.0 * PI).sqrt() * (-(e2 * s * s + t2 * d * d) / 8.0).exp()
}

/// `ln w = −ε̃²/8`.
pub fn ln_w_from_epsilon_tilde(epsilon_tilde: f64) -> f64 {
    -epsilon_tilde * epsilon_tilde / 8.0
}

/// `w = exp(−ε̃²/8)`; accepts the limiting value `ε̃ = 0`.
pub fn w_from_epsilon_tilde(epsilon_tilde: f64) -> f64 {
    ln_w_from_epsilon_tilde(epsilon_tilde).exp()
}

pub fn w_factor(m: &GaussianMeter) -> f64 {
    m.ln_w().exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Strong,
    WeakCoherent,
    WeakIncoherent,
    /// Exists only for observables with more than two eigenvalues; never
    /// produced for the two-valued observables measured here.
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "nearest")]
pub enum Regime {
    Pure(RegimeLabel),
    /// Between thresholds; carries the closest label.
    Crossover(RegimeLabel),
}

impl Regime {
    pub fn label(&self) -> RegimeLabel {
        match *self {
            Regime::Pure(l) | Regime::Crossover(l) => l,
        }
    }

    pub fn is_crossover(&self) -> bool {
        matches!(self, Regime::Crossover(_))
    }
}

/// Regime of a two-valued measurement. Thresholds are inclusive:
/// strong iff `1/ε ≤ 0.1`, weak-coherent iff `1/ε̃ ≥ 10`, weak-incoherent iff
/// `1/ε ≥ 10` and `1/ε̃ ≤ 0.1`.
pub fn classify_regime(m: &GaussianMeter) -> Regime {
    let (spread, coherence) = (m.spread(), m.coherence_length());
    if spread <= STRONG_SPREAD {
        return Regime::Pure(RegimeLabel::Strong);
    }
    if coherence >= COHERENT_LENGTH {
        return Regime::Pure(RegimeLabel::WeakCoherent);
    }
    if spread >= WEAK_SPREAD && coherence <= INCOHERENT_LENGTH {
        return Regime::Pure(RegimeLabel::WeakIncoherent);
    }
    // Decades away from each region.
    let gap = |v: f64| v.max(0.0);
    let strong = gap((spread / STRONG_SPREAD).log10());
    let coherent = gap((COHERENT_LENGTH / coherence).log10());
    let incoherent = gap((WEAK_SPREAD / spread).log10()) + gap((coherence / INCOHERENT_LENGTH).log10());
    let nearest = [
        (strong, RegimeLabel::Strong),
        (coherent, RegimeLabel::WeakCoherent),
        (incoherent, RegimeLabel::WeakIncoherent),
    ]
    .into_iter()
    .min_by(|a, b| a.0.total_cmp(&b.0))
    .map(|(_, l)| l)
    .unwrap_or(RegimeLabel::Strong);
    Regime::Crossover(nearest)
}

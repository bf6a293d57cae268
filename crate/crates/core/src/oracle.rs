//! Brute-force Born-rule evaluation of the joint readout law on a grid.
//!
//! The meter kernels are arbitrary (sampled on a uniform grid whose spacing
//! divides the unit pointer shift) and the system enters only through the
//! traces `W_kk' = Tr[E A_k ρ_i A_k']` over the branch operators
//! `A ∈ {Π_L, |R,+⟩⟨R,+|, |R,−⟩⟨R,−|}`. With `T_k` the pointer shift attached to
//! branch `k`,
//!
//! `P{E, x, y} = Σ_kk' W_kk' ρ_X(x − a_k, x − a_k') ρ_Y(y − b_k, y − b_k')`.
//!
//! Nothing here touches the closed-form engine in [`crate::statistics`];
//! [`oracle_check`] is the harness comparing the two.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::{complement, pi_l, right_eigenprojectors, BlochAxis, PureState, SystemOperator};
use crate::meters::{meter_density, GaussianMeter};
use crate::statistics::{joint_density, Experiment, MomentReport};

/// Default grid spacing (sixteen nodes per unit shift).
pub const DEFAULT_SPACING: f64 = 1.0 / 16.0;
/// Default pass threshold for [`oracle_check`].
pub const ORACLE_TOLERANCE: f64 = 1e-6;
/// Grid trace must equal one to this accuracy.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Mass allowed within two units of either grid edge.
pub const EDGE_MASS_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue tolerated in the kernel positivity check.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Largest node count per axis the oracle will allocate.
pub const MAX_NODES: usize = 4096;

/// Grid half-range for a Gaussian meter: `8/ε + 2`.
pub fn default_half_range(meter: &GaussianMeter) -> f64 {
    8.0 / meter.epsilon() + 2.0
}

/// A meter kernel `ρ(x_i, x_j)` on a uniform symmetric grid. Only the band
/// `|i − j| ≤ 2` unit shifts is stored, which is all the Born-rule sum reads.
#[derive(Debug, Clone)]
pub struct GriddedMeter {
    spacing: f64,
    steps_per_unit: usize,
    nodes: Vec<f64>,
    band: usize,
    kernel: Vec<Complex64>,
}

fn steps_per_unit(spacing: f64) -> Result<usize> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::IncommensurateGrid { spacing });
    }
    let s = (1.0 / spacing).round();
    if s < 1.0 || ((1.0 / spacing) - s).abs() > 1e-9 {
        return Err(Error::IncommensurateGrid { spacing });
    }
    Ok(s as usize)
}

impl GriddedMeter {
    /// Samples `kernel(x, x')` on nodes `k·spacing` with `|x| ≤ half_range`
    /// and checks trace, edge mass, Hermiticity and (windowed) positivity.
    pub fn from_kernel<F>(spacing: f64, half_range: f64, kernel: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let s = steps_per_unit(spacing)?;
        let h = 1.0 / s as f64;
        let k_max = (half_range / h).ceil();
        if !(k_max.is_finite() && 2.0 * k_max < MAX_NODES as f64) {
            return Err(Error::InvalidArgument(format!(
                "grid of {} nodes per axis exceeds the limit of {MAX_NODES}; use a coarser spacing or a larger epsilon",
                2.0 * k_max + 1.0
            )));
        }
        let k_max = k_max as i64;
        let nodes: Vec<f64> = (-k_max..=k_max).map(|k| k as f64 * h).collect();
        let n = nodes.len();
        let band = 2 * s;
        let width = 2 * band + 1;
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let nodes = &nodes;
                let kernel = &kernel;
                (0..width).map(move |d| {
                    let j = i as i64 + d as i64 - band as i64;
                    if j < 0 || j >= n as i64 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        kernel(nodes[i], nodes[j as usize])
                    }
                })
            })
            .collect();
        let g = Self { spacing: h, steps_per_unit: s, nodes, band, kernel: values };
        g.check()?;
        Ok(g)
    }

    pub fn gaussian(meter: &GaussianMeter, spacing: f64) -> Result<Self> {
        Self::gaussian_with_range(meter, spacing, default_half_range(meter))
    }

    pub fn gaussian_with_range(meter: &GaussianMeter, spacing: f64, half_range: f64) -> Result<Self> {
        let m = *meter;
        Self::from_kernel(spacing, half_range, move |a, b| Complex64::new(meter_density(&m, a, b), 0.0))
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ρ(x_i, x_j)`; zero outside the grid or the stored band.
    pub fn kernel(&self, i: i64, j: i64) -> Complex64 {
        let n = self.nodes.len() as i64;
        let d = j - i;
        if i < 0 || j < 0 || i >= n || j >= n || d.unsigned_abs() as usize > self.band {
            return Complex64::new(0.0, 0.0);
        }
        self.kernel[i as usize * (2 * self.band + 1) + (d + self.band as i64) as usize]
    }

    /// `Σ_i ρ(x_i, x_i) h`.
    pub fn trace(&self) -> f64 {
        (0..self.nodes.len() as i64).map(|i| self.kernel(i, i).re).sum::<f64>() * self.spacing
    }

    fn check(&self) -> Result<()> {
        let n = self.nodes.len() as i64;
        if n < 4 * self.steps_per_unit as i64 + 1 {
            return Err(Error::InsufficientCoverage { tail: 1.0 });
        }
        let trace = self.trace();
        if !((trace - 1.0).abs() <= TRACE_TOLERANCE) {
            return Err(Error::InsufficientCoverage { tail: (1.0 - trace).abs() });
        }
        let edge = 2 * self.steps_per_unit as i64;
        let edge_mass: f64 = (0..edge).chain(n - edge..n).map(|i| self.kernel(i, i).re).sum::<f64>() * self.spacing;
        if edge_mass > EDGE_MASS_TOLERANCE {
            return Err(Error::InsufficientCoverage { tail: edge_mass });
        }
        let scale = (0..n).map(|i| self.kernel(i, i).norm()).fold(0.0, f64::max);
        for i in 0..n {
            for d in 1..=self.band as i64 {
                let r = (self.kernel(i, i + d) - self.kernel(i + d, i).conj()).norm();
                if i + d < n && r > 1e-12 * scale {
                    return Err(Error::InvalidMeter(format!("kernel is not Hermitian at node {i} (residual {r:.3e})")));
                }
            }
        }
        let min_ev = self.min_window_eigenvalue();
        if min_ev < -PSD_TOLERANCE {
            return Err(Error::InvalidMeter(format!("kernel is not positive semidefinite (eigenvalue {min_ev:.3e})")));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the `(2·band + 1)`-node principal submatrices
    /// at the centre and half-way to each edge, in units of the grid measure.
    /// Principal submatrices of a positive kernel are positive, so a negative
    /// value here is conclusive.
    pub fn min_window_eigenvalue(&self) -> f64 {
        let n = self.nodes.len() as i64;
        let w = (self.band as i64 + 1).min(n);
        let centre = n / 2 - w / 2;
        [centre, centre / 2, centre + (n - w - centre) / 2]
            .into_iter()
            .map(|start| {
                let start = start.clamp(0, n - w);
                let m = DMatrix::from_fn(w as usize, w as usize, |a, b| {
                    self.kernel(start + a as i64, start + b as i64) * self.spacing
                });
                m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Post-selection on `E_f` succeeded.
    Success,
    /// Post-selected on `1 − E_f`.
    Failure,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Success => "success",
            Branch::Failure => "failure",
        }
    }
}

/// `P{f, x_i, y_j}` for both post-selection branches (row-major, x outer).
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedJoint {
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    pub spacing_x: f64,
    pub spacing_y: f64,
    pub success: Vec<f64>,
    pub failure: Vec<f64>,
}

impl GriddedJoint {
    pub fn values(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::Success => &self.success,
            Branch::Failure => &self.failure,
        }
    }

    pub fn value(&self, branch: Branch, i: usize, j: usize) -> f64 {
        self.values(branch)[i * self.y_nodes.len() + j]
    }

    pub fn mass(&self, branch: Branch) -> f64 {
        self.values(branch).iter().sum::<f64>() * self.spacing_x * self.spacing_y
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(Branch::Success) + self.mass(Branch::Failure)
    }

    pub fn min_value(&self) -> f64 {
        self.success.iter().chain(&self.failure).copied().fold(f64::INFINITY, f64::min)
    }

    fn points(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.x_nodes
            .iter()
            .enumerate()
            .flat_map(move |(i, &x)| self.y_nodes.iter().enumerate().map(move |(j, &y)| (i, j, x, y)))
    }

    /// CSV with header `x,y,branch,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "branch", "probability"])?;
        for branch in [Branch::Success, Branch::Failure] {
            for (i, j, x, y) in self.points() {
                w.write_record([x.to_string(), y.to_string(), branch.as_str().to_string(), self.value(branch, i, j).to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Per-branch trace weights `Tr[E A_k ρ A_k']` and the index shifts of each branch.
fn branch_weights(rho_i: &SystemOperator, effect: &SystemOperator, axis: &BlochAxis) -> [[Complex64; 3]; 3] {
    let (pp, pm) = right_eigenprojectors(axis);
    let ops = [pi_l(), pp, pm];
    let mut w = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (k, a) in ops.iter().enumerate() {
        let left = &(effect * a) * rho_i;
        for (kp, b) in ops.iter().enumerate() {
            w[k][kp] = (&left * b).trace();
        }
    }
    w
}

fn evaluate(weights: &[[Complex64; 3]; 3], mx: &GriddedMeter, my: &GriddedMeter) -> Vec<f64> {
    let sx = mx.steps_per_unit() as i64;
    let sy = my.steps_per_unit() as i64;
    // Branch k shifts (x, y) by (a_k, b_k) in grid steps.
    let shifts = [(sx, 0i64), (0, sy), (0, -sy)];
    let ny = my.len();
    (0..mx.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let i = i as i64;
            (0..ny as i64).map(move |j| {
                let mut p = Complex64::new(0.0, 0.0);
                for (k, &(ak, bk)) in shifts.iter().enumerate() {
                    for (kp, &(akp, bkp)) in shifts.iter().enumerate() {
                        let w = weights[k][kp];
                        if w.norm_sqr() == 0.0 {
                            continue;
                        }
                        p += w * mx.kernel(i - ak, i - akp) * my.kernel(j - bk, j - bkp);
                    }
                }
                p.re
            })
        })
        .collect()
}

/// Joint readout probabilities for both branches from the Born rule.
pub fn brute_force_joint(
    rho_i: &SystemOperator,
    effect: &SystemOperator,
    axis: &BlochAxis,
    meter_x: &GriddedMeter,
    meter_y: &GriddedMeter,
) -> Result<GriddedJoint> {
    let effect_c = complement(effect)?;
    let success = evaluate(&branch_weights(rho_i, effect, axis), meter_x, meter_y);
    let failure = evaluate(&branch_weights(rho_i, &effect_c, axis), meter_x, meter_y);
    Ok(GriddedJoint {
        x_nodes: meter_x.nodes().to_vec(),
        y_nodes: meter_y.nodes().to_vec(),
        spacing_x: meter_x.spacing(),
        spacing_y: meter_y.spacing(),
        success,
        failure,
    })
}

/// Moments of the success branch by weighted sums over the grid.
pub fn oracle_moments(gj: &GriddedJoint) -> Result<MomentReport> {
    let mass = gj.mass(Branch::Success);
    if !(mass > 0.0) {
        return Err(Error::ZeroPostselection { value: mass });
    }
    let (mut sx, mut sy, mut sxy, mut sxy2, mut total) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, j, x, y) in gj.points() {
        let p = gj.value(Branch::Success, i, j);
        total += p;
        sx += p * x;
        sy += p * y;
        sxy += p * x * y;
        sxy2 += p * x * y * y;
    }
    Ok(MomentReport {
        mean_x: sx / total,
        mean_y: sy / total,
        cross_xy: sxy / total,
        cross_xy2: sxy2 / total,
        norm_n: None,
        p_postselect: mass,
    })
}

fn pure_wavefunction(eps: f64, x: f64) -> f64 {
    (eps * eps / (2.0 * PI)).powf(0.25) * (-eps * eps * x * x / 4.0).exp()
}

/// Evolves `|Ψ⟩ ⊗ ψ_X ⊗ ψ_Y` with pure Gaussian pointers explicitly: the left
/// arm shifts the x pointer by one unit; the right arm is split into its
/// `σ_R` eigencomponents, which shift the y pointer by `±1`. Then projects on
/// `|Φ⟩` (success) and its complement (failure).
pub fn pure_evolution_joint(
    psi: &PureState,
    phi: &PureState,
    axis: &BlochAxis,
    eps_x: f64,
    eps_y: f64,
    spacing: f64,
) -> Result<GriddedJoint> {
    let s = steps_per_unit(spacing)? as i64;
    let h = 1.0 / s as f64;
    let grid = |eps: f64| {
        let k = ((8.0 / eps + 2.0) / h).ceil() as i64;
        (-k..=k).map(|i| i as f64 * h).collect::<Vec<_>>()
    };
    let (xs, ys) = (grid(eps_x), grid(eps_y));
    let (nx, ny) = (xs.len() as i64, ys.len() as i64);
    let fx: Vec<f64> = xs.iter().map(|&x| pure_wavefunction(eps_x, x)).collect();
    let fy: Vec<f64> = ys.iter().map(|&y| pure_wavefunction(eps_y, y)).collect();
    let shifted = |f: &[f64], n: i64, i: i64| if i >= 0 && i < n { f[i as usize] } else { 0.0 };

    let a = psi.amplitudes();
    let b = axis.eigen_to_lab();
    // Right-arm amplitudes in the σ_R eigenbasis.
    let bd = b.adjoint();
    let r_plus = bd[(0, 0)] * a[2] + bd[(0, 1)] * a[3];
    let r_minus = bd[(1, 0)] * a[2] + bd[(1, 1)] * a[3];
    let phi_amps = phi.amplitudes();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut succ = Vec::with_capacity(ny as usize);
            let mut fail = Vec::with_capacity(ny as usize);
            for j in 0..ny {
                let (xi, yj) = (i, j);
                let left = shifted(&fx, nx, xi - s) * fy[yj as usize];
                let plus = fx[xi as usize] * shifted(&fy, ny, yj - s);
                let minus = fx[xi as usize] * shifted(&fy, ny, yj + s);
                let rp = r_plus * plus;
                let rm = r_minus * minus;
                let state = [
                    a[0] * left,
                    a[1] * left,
                    b[(0, 0)] * rp + b[(0, 1)] * rm,
                    b[(1, 0)] * rp + b[(1, 1)] * rm,
                ];
                let amp: Complex64 = phi_amps.iter().zip(&state).map(|(p, v)| p.conj() * v).sum();
                let norm: f64 = state.iter().map(|v| v.norm_sqr()).sum();
                succ.push(amp.norm_sqr());
                fail.push(norm - amp.norm_sqr());
            }
            (succ, fail)
        })
        .collect();
    let (mut success, mut failure) = (Vec::new(), Vec::new());
    for (sr, fr) in rows {
        success.extend(sr);
        failure.extend(fr);
    }
    Ok(GriddedJoint { x_nodes: xs, y_nodes: ys, spacing_x: h, spacing_y: h, success, failure })
}

/// Outcome of comparing the oracle grid with an analytic density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub max_residual: f64,
    pub tolerance: f64,
    pub total_mass: f64,
    pub grid_points: usize,
    pub passed: bool,
}

/// Largest pointwise difference between the oracle and `analytic(branch, x, y)`,
/// where `analytic` returns the joint probability density `P{f, x, y}`.
pub fn max_residual<F>(gj: &GriddedJoint, analytic: F) -> f64
where
    F: Fn(Branch, f64, f64) -> f64 + Sync,
{
    let ny = gj.y_nodes.len();
    [Branch::Success, Branch::Failure]
        .into_iter()
        .map(|branch| {
            let vals = gj.values(branch);
            (0..gj.x_nodes.len())
                .into_par_iter()
                .map(|i| {
                    let x = gj.x_nodes[i];
                    (0..ny)
                        .map(|j| (vals[i * ny + j] - analytic(branch, x, gj.y_nodes[j])).abs())
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Oracle vs closed-form engine for a Gaussian-meter experiment.
pub fn oracle_check(exp: &Experiment, spacing: f64) -> Result<OracleCheck> {
    let comp = if complement(exp.effect())?.max_abs_entry() <= 1e-12 {
        None
    } else {
        match exp.complement() {
            Ok(c) => Some(c),
            Err(Error::ZeroPostselection { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let p = exp.p_postselect();
    oracle_check_with(exp, spacing, |branch, x, y| match branch {
        Branch::Success => p * joint_density(exp, x, y),
        Branch::Failure => comp.as_ref().map_or(0.0, |c| c.p_postselect() * joint_density(c, x, y)),
    })
}

/// As [`oracle_check`] with a caller-supplied analytic density.
pub fn oracle_check_with<F>(exp: &Experiment, spacing: f64, analytic: F) -> Result<OracleCheck>
where
    F: Fn(Branch, f64, f64) -> f64 + Sync,
{
    let mx = GriddedMeter::gaussian(exp.meter_x(), spacing)?;
    let my = GriddedMeter::gaussian(exp.meter_y(), spacing)?;
    let gj = brute_force_joint(exp.rho_i(), exp.effect(), exp.axis(), &mx, &my)?;
    let r = max_residual(&gj, analytic);
    Ok(OracleCheck {
        max_residual: r,
        tolerance: ORACLE_TOLERANCE,
        total_mass: gj.total_mass(),
        grid_points: gj.success.len(),
        passed: r <= ORACLE_TOLERANCE,
    })
}

//! Linear algebra on the four-dimensional path ⊗ polarization space.
//!
//! Vectors and operators are stored in the laboratory basis
//! `(L,H), (L,V), (R,H), (R,V)`. Polarization eigenstates `|±⟩` along a
//! [`BlochAxis`] are obtained from the axis, so `σ_R` for an arbitrary
//! direction is a genuine operator in that basis. For the axis `ẑ` the
//! laboratory basis coincides with the `σ_R` eigenbasis `(L,+), (L,−), (R,+), (R,−)`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;
pub type Vec2 = Vector2<Complex64>;
pub type Vec4 = Vector4<Complex64>;

/// Relative tolerance for Hermiticity, positivity and spectrum checks,
/// scaled by the largest absolute matrix entry.
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

/// Tolerance on `|r|² + |t|² = 1` and on `V†V = 1` for splitter inputs.
pub const SPLITTER_TOLERANCE: f64 = 1e-10;

/// Tolerance on the Euclidean norm of a Bloch axis.
pub const AXIS_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unit vector on the Bloch sphere selecting the polarization eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAxis {
    n: [f64; 3],
}

impl BlochAxis {
    pub fn new(n: [f64; 3]) -> Result<Self> {
        let norm = Vector3::from(n).norm();
        if !norm.is_finite() || (norm - 1.0).abs() > AXIS_TOLERANCE {
            return Err(Error::InvalidAxis { norm });
        }
        Ok(Self { n })
    }

    /// Axis from spherical angles (polar `theta`, azimuth `phi`).
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        Self::new([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    /// `ẑ`: `|+⟩ = |H⟩`, `|−⟩ = |V⟩`.
    pub fn z() -> Self {
        Self { n: [0.0, 0.0, 1.0] }
    }

    pub fn vector(&self) -> [f64; 3] {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.n[2].clamp(-1.0, 1.0).acos()
    }

    pub fn phi(&self) -> f64 {
        self.n[1].atan2(self.n[0])
    }

    /// `n·σ⃗` in the H/V basis.
    pub fn pauli(&self) -> Mat2 {
        let [x, y, z] = self.n;
        Mat2::new(c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0))
    }

    /// Eigenvectors `(|+⟩, |−⟩)` of `n·σ⃗` expressed in the H/V basis.
    pub fn eigenvectors(&self) -> (Vec2, Vec2) {
        let (theta, phi) = (self.theta(), self.phi());
        let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let e = Complex64::from_polar(1.0, phi);
        let plus = Vec2::new(c(co, 0.0), e * s);
        let minus = Vec2::new(-e.conj() * s, c(co, 0.0));
        (plus, minus)
    }

    /// Unitary whose columns are `|+⟩, |−⟩`; maps eigen components to H/V components.
    pub fn eigen_to_lab(&self) -> Mat2 {
        let (p, m) = self.eigenvectors();
        Mat2::from_columns(&[p, m])
    }
}

/// Normalized pure state of path and polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec4,
}

impl PureState {
    /// Normalizes `amps`, given in the laboratory basis. Zero vectors are rejected.
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        Self::from_vector(Vec4::from(amps))
    }

    pub fn from_vector(v: Vec4) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < f64::MIN_POSITIVE.sqrt() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    /// State from components along `(L,+), (L,−), (R,+), (R,−)` for `axis`.
    pub fn from_eigen_components(amps: [Complex64; 4], axis: &BlochAxis) -> Result<Self> {
        let b = axis.eigen_to_lab();
        let left = b * Vec2::new(amps[0], amps[1]);
        let right = b * Vec2::new(amps[2], amps[3]);
        Self::from_vector(Vec4::new(left[0], left[1], right[0], right[1]))
    }

    /// Components along `(L,+), (L,−), (R,+), (R,−)` for `axis`.
    pub fn eigen_components(&self, axis: &BlochAxis) -> [Complex64; 4] {
        let b = axis.eigen_to_lab().adjoint();
        let left = b * Vec2::new(self.amps[0], self.amps[1]);
        let right = b * Vec2::new(self.amps[2], self.amps[3]);
        [left[0], left[1], right[0], right[1]]
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.amps[0], self.amps[1], self.amps[2], self.amps[3]]
    }

    pub fn vector(&self) -> &Vec4 {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `⟨self|op|other⟩`.
    pub fn matrix_element(&self, op: &SystemOperator, other: &PureState) -> Complex64 {
        self.amps.dotc(&(op.matrix() * other.amps))
    }

    pub fn projector(&self) -> SystemOperator {
        SystemOperator::new(self.amps * self.amps.adjoint())
    }
}

/// 4×4 complex operator on path ⊗ polarization. Holds density matrices,
/// POVM elements and the observables `Π_L`, `Π_R`, `σ_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemOperator {
    m: Mat4,
}

impl SystemOperator {
    pub fn new(m: Mat4) -> Self {
        Self { m }
    }

    /// Row-major construction.
    pub fn from_rows(rows: [[Complex64; 4]; 4]) -> Self {
        Self::new(Mat4::from_fn(|i, j| rows[i][j]))
    }

    pub fn identity() -> Self {
        Self::new(Mat4::identity())
    }

    pub fn zero() -> Self {
        Self::new(Mat4::zeros())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn rows(&self) -> [[Complex64; 4]; 4] {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m * c(s, 0.0))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Block-diagonal in path: no `|L⟩⟨R|` or `|R⟩⟨L|` coherences.
    pub fn is_path_block_diagonal(&self, tol: f64) -> bool {
        (0..2).all(|i| (2..4).all(|j| self.m[(i, j)].norm() <= tol && self.m[(j, i)].norm() <= tol))
    }

    /// Proportional to the identity within `tol` (relative to the largest entry).
    pub fn is_scalar(&self, tol: f64) -> bool {
        let d = self.m[(0, 0)];
        let scale = self.max_abs_entry().max(f64::MIN_POSITIVE);
        (0..4).all(|i| {
            (0..4).all(|j| {
                let expect = if i == j { d } else { ZERO };
                (self.m[(i, j)] - expect).norm() <= tol * scale
            })
        })
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 4] {
        let h = (self.m + self.m.adjoint()) * c(0.5, 0.0);
        let ev = h.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }
}

impl std::ops::Mul for &SystemOperator {
    type Output = SystemOperator;
    fn mul(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator::new(self.m * rhs.m)
    }
}

impl std::ops::Add for &SystemOperator {
    type Output = SystemOperator;
    fn add(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator::new(self.m + rhs.m)
    }
}

impl std::ops::Sub for &SystemOperator {
    type Output = SystemOperator;
    fn sub(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator::new(self.m - rhs.m)
    }
}

/// Projector on the left arm.
pub fn pi_l() -> SystemOperator {
    SystemOperator::new(Mat4::from_diagonal(&Vec4::new(ONE, ONE, ZERO, ZERO)))
}

/// Projector on the right arm.
pub fn pi_r() -> SystemOperator {
    SystemOperator::new(Mat4::from_diagonal(&Vec4::new(ZERO, ZERO, ONE, ONE)))
}

fn right_block(b: &Mat2) -> SystemOperator {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    SystemOperator::new(m)
}

/// `σ_R = |R,+⟩⟨R,+| − |R,−⟩⟨R,−|`: zero on the left arm, `n·σ⃗` on the right.
pub fn sigma_r(axis: &BlochAxis) -> SystemOperator {
    right_block(&axis.pauli())
}

/// `(|R,+⟩⟨R,+|, |R,−⟩⟨R,−|)`.
pub fn right_eigenprojectors(axis: &BlochAxis) -> (SystemOperator, SystemOperator) {
    let (p, m) = axis.eigenvectors();
    (right_block(&(p * p.adjoint())), right_block(&(m * m.adjoint())))
}

/// Complementary post-selection `1 − E_f`. The result may be the zero
/// operator (for `E_f = 1`); [`validate`] flags it as unusable.
pub fn complement(effect: &SystemOperator) -> Result<SystemOperator> {
    let diag = validate(effect, Role::Povm);
    if !diag.passed() {
        return Err(Error::InvalidOperator { role: "POVM element", reason: diag.failures.join("; ") });
    }
    Ok(&SystemOperator::identity() - effect)
}

fn unitary_residual(v: &Mat2) -> f64 {
    (v.adjoint() * v - Mat2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_splitter(r: Complex64, t: Complex64, va: &Mat2, vb: &Mat2, names: [&'static str; 2]) -> Result<()> {
    let norm_sq = r.norm_sqr() + t.norm_sqr();
    if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > SPLITTER_TOLERANCE {
        return Err(Error::DegenerateAmplitudes { norm_sq });
    }
    for (v, name) in [va, vb].into_iter().zip(names) {
        let residual = unitary_residual(v);
        if !residual.is_finite() || residual > SPLITTER_TOLERANCE {
            return Err(Error::NotUnitary { name, residual });
        }
    }
    Ok(())
}

/// Prepared state `V₁ r₁|L,H⟩ + V₂ t₁|R,H⟩`.
pub fn make_preparation(r1: Complex64, t1: Complex64, v1: &Mat2, v2: &Mat2) -> Result<PureState> {
    check_splitter(r1, t1, v1, v2, ["V1", "V2"])?;
    let left = v1.column(0) * r1;
    let right = v2.column(0) * t1;
    PureState::from_vector(Vec4::new(left[0], left[1], right[0], right[1]))
}

/// Post-selected state `V₃† r₂*|L,H⟩ + V₄† t₂*|R,H⟩`.
pub fn make_postselection(r2: Complex64, t2: Complex64, v3: &Mat2, v4: &Mat2) -> Result<PureState> {
    check_splitter(r2, t2, v3, v4, ["V3", "V4"])?;
    let left = v3.adjoint().column(0) * r2.conj();
    let right = v4.adjoint().column(0) * t2.conj();
    PureState::from_vector(Vec4::new(left[0], left[1], right[0], right[1]))
}

/// A 2×2 unitary whose first column is `target` (normalized).
pub fn unitary_completion(target: Vec2) -> Result<Mat2> {
    let norm = target.norm();
    if norm < f64::MIN_POSITIVE.sqrt() {
        return Err(Error::ZeroNorm);
    }
    let u = target.unscale(norm);
    let perp = Vec2::new(-u[1].conj(), u[0].conj());
    Ok(Mat2::from_columns(&[u, perp]))
}

/// Which set of constraints an operator is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Density,
    Povm,
}

/// Per-invariant residuals from [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub role: Role,
    pub hermitian_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks a density matrix (Hermitian, PSD, unit trace) or a POVM element
/// (Hermitian, spectrum in `[0, 1]`, trace in `(0, 4]`). Reports only.
pub fn validate(op: &SystemOperator, role: Role) -> Diagnostics {
    let m = op.matrix();
    let tol = OPERATOR_TOLERANCE * op.max_abs_entry();
    let hermitian_residual = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ev = op.hermitian_eigenvalues();
    let (min_eigenvalue, max_eigenvalue) = (ev[0], ev[3]);
    let trace = op.trace().re;
    let mut failures = Vec::new();

    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        failures.push("non-finite entry".to_string());
    }
    if hermitian_residual > tol {
        failures.push(format!("not Hermitian (residual {hermitian_residual:.3e})"));
    }
    if min_eigenvalue < -tol {
        failures.push(format!("negative eigenvalue {min_eigenvalue:.3e}"));
    }
    match role {
        Role::Density => {
            if (trace - 1.0).abs() > OPERATOR_TOLERANCE {
                failures.push(format!("trace {trace} differs from 1"));
            }
        }
        Role::Povm => {
            if max_eigenvalue > 1.0 + tol.max(OPERATOR_TOLERANCE) {
                failures.push(format!("eigenvalue {max_eigenvalue} exceeds 1"));
            }
            if trace <= OPERATOR_TOLERANCE || trace > 4.0 + OPERATOR_TOLERANCE {
                failures.push(format!("trace {trace} outside (0, 4]"));
            }
        }
    }

    Diagnostics { role, hermitian_residual, min_eigenvalue, max_eigenvalue, trace, tolerance: tol, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &SystemOperator, b: &SystemOperator) -> f64 {
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn symmetric_splitter_without_rotation() {
        let h = 1.0 / 2f64.sqrt();
        let psi = make_preparation(c(h, 0.0), c(h, 0.0), &Mat2::identity(), &Mat2::identity()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0] - c(h, 0.0)).norm() < 1e-15);
        assert!(a[1].norm() < 1e-15);
        assert!((a[2] - c(h, 0.0)).norm() < 1e-15);
        assert!(a[3].norm() < 1e-15);
    }

    #[test]
    fn reflecting_splitter_gives_left_horizontal() {
        let psi = make_preparation(ONE, ZERO, &Mat2::identity(), &Mat2::identity()).unwrap();
        assert_eq!(psi.amplitudes(), [ONE, ZERO, ZERO, ZERO]);
        let phi = make_postselection(ONE, ZERO, &Mat2::identity(), &Mat2::identity()).unwrap();
        assert_eq!(phi.amplitudes(), [ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn splitter_reaches_the_two_two_three_minus_two_state() {
        // r1 ∝ |(2,2)|, t1 ∝ |(3,-2)|, rotations complete the blocks.
        let left = Vec2::new(c(2.0, 0.0), c(2.0, 0.0));
        let right = Vec2::new(c(3.0, 0.0), c(-2.0, 0.0));
        let total = (left.norm_squared() + right.norm_squared()).sqrt();
        let r1 = c(left.norm() / total, 0.0);
        let t1 = c(right.norm() / total, 0.0);
        let v1 = unitary_completion(left).unwrap();
        let v2 = unitary_completion(right).unwrap();
        let psi = make_preparation(r1, t1, &v1, &v2).unwrap();
        let expect = PureState::new([c(2.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert!((psi.inner(&expect).norm() - 1.0).abs() < 1e-14);
        assert!((v2 * Vec2::new(ONE, ZERO) - right.unscale(right.norm())).norm() < 1e-15);
    }

    #[test]
    fn postselection_reaches_all_ones_state() {
        let h = 1.0 / 2f64.sqrt();
        let block = Vec2::new(ONE, ONE);
        // Φ's blocks are V† applied to |H⟩, so V = (completion)†.
        let v = unitary_completion(block).unwrap().adjoint();
        let phi = make_postselection(c(h, 0.0), c(h, 0.0), &v, &v).unwrap();
        for a in phi.amplitudes() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn splitter_errors() {
        let id = Mat2::identity();
        assert!(matches!(
            make_preparation(c(0.5, 0.0), c(0.5, 0.0), &id, &id),
            Err(Error::DegenerateAmplitudes { .. })
        ));
        let bad = Mat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(make_preparation(ONE, ZERO, &bad, &id), Err(Error::NotUnitary { name: "V1", .. })));
        assert!(matches!(make_postselection(ONE, ZERO, &id, &bad), Err(Error::NotUnitary { name: "V4", .. })));
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(PureState::new([ZERO; 4]), Err(Error::ZeroNorm));
    }

    #[test]
    fn sigma_r_along_z_is_diagonal() {
        let s = sigma_r(&BlochAxis::z());
        let expect = SystemOperator::new(Mat4::from_diagonal(&Vec4::new(ZERO, ZERO, ONE, -ONE)));
        assert_eq!(s, expect);
    }

    #[test]
    fn sigma_r_squares_to_right_projector() {
        for (theta, phi) in [(0.3, 1.1), (2.0, -0.4), (std::f64::consts::FRAC_PI_2, 0.0)] {
            let axis = BlochAxis::from_angles(theta, phi).unwrap();
            let s = sigma_r(&axis);
            assert!(max_diff(&(&s * &s), &pi_r()) < 1e-12);
            assert!((&pi_l() * &s).max_abs_entry() < 1e-15);
            assert!(s.trace().norm() < 1e-15);
            let (p, m) = right_eigenprojectors(&axis);
            assert!(max_diff(&(&p - &m), &s) < 1e-12);
            assert!(max_diff(&(&p + &m), &pi_r()) < 1e-12);
        }
        assert_eq!(&pi_l() + &pi_r(), SystemOperator::identity());
    }

    #[test]
    fn eigen_components_round_trip() {
        let axis = BlochAxis::from_angles(1.2, 0.7).unwrap();
        let amps = [c(0.1, 0.2), c(-0.3, 0.0), c(0.5, -0.5), c(0.0, 0.4)];
        let psi = PureState::from_eigen_components(amps, &axis).unwrap();
        let back = psi.eigen_components(&axis);
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for (a, b) in amps.iter().zip(back) {
            assert!((a / norm - b).norm() < 1e-14);
        }
    }

    #[test]
    fn complement_of_projector_has_trace_three() {
        let phi = PureState::new([ONE; 4]).unwrap();
        let e = phi.projector();
        let ec = complement(&e).unwrap();
        assert!((ec.trace().re - 3.0).abs() < 1e-14);
        assert!(validate(&ec, Role::Povm).passed());
        assert!(max_diff(&complement(&ec).unwrap(), &e) < 1e-15);
    }

    #[test]
    fn complement_of_identity_is_flagged() {
        let ec = complement(&SystemOperator::identity()).unwrap();
        assert_eq!(ec, SystemOperator::zero());
        let d = validate(&ec, Role::Povm);
        assert!(!d.passed());
        assert!(d.failures.iter().any(|f| f.contains("trace")));
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&SystemOperator::identity().scale(0.25), Role::Density).passed());

        let mut m = Mat4::from_diagonal(&Vec4::new(c(0.51, 0.0), c(0.5, 0.0), ZERO, ZERO));
        m[(3, 3)] = c(-0.01, 0.0);
        let d = validate(&SystemOperator::new(m), Role::Density);
        assert!(!d.passed());
        assert!((d.min_eigenvalue + 0.01).abs() < 1e-12);

        let e = SystemOperator::new(Mat4::from_diagonal(&Vec4::new(c(1.2, 0.0), ZERO, ZERO, ZERO)));
        let d = validate(&e, Role::Povm);
        assert!(!d.passed());
        assert!((d.max_eigenvalue - 1.2).abs() < 1e-12);

        let mut nh = Mat4::identity() * c(0.25, 0.0);
        nh[(0, 1)] = c(0.1, 0.0);
        assert!(!validate(&SystemOperator::new(nh), Role::Density).passed());
    }

    #[test]
    fn axis_validation() {
        assert!(BlochAxis::new([0.0, 0.0, 1.0 + 1e-9]).is_err());
        assert!(BlochAxis::new([0.6, 0.8, 0.0]).is_ok());
        let a = BlochAxis::from_angles(0.4, 2.5).unwrap();
        let b = BlochAxis::from_angles(a.theta(), a.phi()).unwrap();
        for (x, y) in a.vector().iter().zip(b.vector()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

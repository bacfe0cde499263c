//! Two-mode Gaussian state algebra.
//!
//! Quadratures are ordered `(X_M, P_M, X_C, P_C)` with `X = (a + a†)/√2`, so the
//! vacuum has covariance `I/2`. The symplectic form is `⊕ [[0, 1], [-1, 0]]`.

use alloc::format;

use crate::real::Real;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Symplectic eigenvalues below `1/2 - PHYSICAL_TOL` are reported as unphysical.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Condition number above which an inversion result carries a warning.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Converts a linear ratio to decibels, `10 log10 x`.
pub fn to_db(x: f64) -> f64 {
    10.0 * Real::log10(x)
}

pub fn from_db(db: f64) -> f64 {
    Real::powf(10.0, db / 10.0)
}

/// Input squeezing expressed as the factor multiplying the X-quadrature variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeSpec(f64);

impl SqueezeSpec {
    pub fn linear(factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::domain(
                "SqueezeSpec",
                format!("factor must be > 0, got {factor}"),
            ));
        }
        Ok(SqueezeSpec(factor))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::linear(from_db(db))
    }

    pub fn factor(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        to_db(self.0)
    }
}

/// 4x4 covariance matrix of the mechanical and optical modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix(Matrix);

/// `σ = ½ V⁻¹`, the quadratic form in the Gaussian Wigner exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix {
    m: Matrix,
    condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalityReport {
    pub physical: bool,
    pub min_symplectic: f64,
}

impl CovMatrix {
    /// Wraps a 4x4 matrix, rejecting asymmetric input.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::domain(
                "CovMatrix",
                format!("expected 4x4, got {0}x{0}", m.dim()),
            ));
        }
        if m.asymmetry() > 1e-12 {
            return Err(Error::domain(
                "CovMatrix",
                format!(
                    "matrix is not symmetric (relative asymmetry {:.2e})",
                    m.asymmetry()
                ),
            ));
        }
        Ok(CovMatrix(m))
    }

    pub fn from_row_major(entries: [f64; 16]) -> Result<Self> {
        Self::new(Matrix::from_row_major(4, entries.to_vec()))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out.copy_from_slice(self.0.as_slice());
        out
    }

    fn block_det(&self, r: usize, c: usize) -> f64 {
        self.get(r, c) * self.get(r + 1, c + 1) - self.get(r, c + 1) * self.get(r + 1, c)
    }

    /// Mechanical block as `[[v11, v12], [v21, v22]]`.
    pub fn mech_block(&self) -> [[f64; 2]; 2] {
        self.block(0, 0)
    }

    pub fn optical_block(&self) -> [[f64; 2]; 2] {
        self.block(2, 2)
    }

    pub fn cross_block(&self) -> [[f64; 2]; 2] {
        self.block(0, 2)
    }

    fn block(&self, r: usize, c: usize) -> [[f64; 2]; 2] {
        [
            [self.get(r, c), self.get(r, c + 1)],
            [self.get(r + 1, c), self.get(r + 1, c + 1)],
        ]
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    /// Symplectic eigenvalues `(ν₋, ν₊)`.
    ///
    /// The eigenvalues of `ΩV` are `±iν₁, ±iν₂`, so `ν₁² + ν₂² = -tr((ΩV)²)/2` and
    /// `ν₁²ν₂² = det V`. Solving that quadratic avoids a general eigen-solver.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let ov = omega().mul(&self.0);
        let s = -0.5 * ov.mul(&ov).trace();
        let p = self.det();
        let disc = (s * s - 4.0 * p).max(0.0).sqrt();
        let hi = 0.5 * (s + disc);
        // small root through the product keeps precision for nearly pure states
        let lo = if hi > 0.0 { p / hi } else { 0.0 };
        (lo.max(0.0).sqrt(), hi.max(0.0).sqrt())
    }

    pub fn check_physical(&self) -> PhysicalityReport {
        let (lo, _) = self.symplectic_eigenvalues();
        // The root itself loses half its digits near a degenerate pair, so the
        // test is made on the characteristic polynomial at 1/4 instead.
        let ov = omega().mul(&self.0);
        let s = -0.5 * ov.mul(&ov).trace();
        let p = self.det();
        let at_quarter = 0.0625 - 0.25 * s + p;
        let physical = p > 0.0 && at_quarter >= -PHYSICAL_TOL * 1e-3 && s >= 0.5 - PHYSICAL_TOL;
        PhysicalityReport {
            physical,
            min_symplectic: lo,
        }
    }

    pub(crate) fn ensure_physical(self, op: &'static str) -> Result<Self> {
        let rep = self.check_physical();
        if rep.physical {
            Ok(self)
        } else {
            Err(Error::Unphysical {
                op,
                min_symplectic: rep.min_symplectic,
            })
        }
    }

    pub fn to_sigma(&self) -> Result<SigmaMatrix> {
        let inv = self
            .0
            .inverse()
            .ok_or_else(|| Error::numerical("sigma_from_cov", "covariance matrix is singular"))?;
        Ok(SigmaMatrix {
            m: inv.matrix.scale(0.5),
            condition: inv.condition,
        })
    }
}

/// Symplectic form for two modes.
pub fn omega() -> Matrix {
    Matrix::from_rows([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ])
}

impl SigmaMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.dim() != 4 || m.asymmetry() > 1e-12 {
            return Err(Error::domain(
                "SigmaMatrix",
                "expected a symmetric 4x4 matrix",
            ));
        }
        let condition = m.inverse().map(|i| i.condition).unwrap_or(f64::INFINITY);
        Ok(SigmaMatrix { m, condition })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    /// 1-norm condition number of the inversion that produced this matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED
    }

    /// Element `σ_ij` with 1-based indices, as written in the physics literature.
    pub fn s(&self, i: usize, j: usize) -> f64 {
        self.m[(i - 1, j - 1)]
    }

    pub fn to_cov(&self) -> Result<CovMatrix> {
        let inv = self
            .m
            .inverse()
            .ok_or_else(|| Error::numerical("cov_from_sigma", "sigma matrix is singular"))?;
        CovMatrix::new(symmetrize(inv.matrix.scale(0.5)))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m
            .cholesky_psd(0.0)
            .map(|l| (0..4).all(|i| l[(i, i)] > 0.0))
            .unwrap_or(false)
    }
}

fn symmetrize(m: Matrix) -> Matrix {
    m.add(&m.transpose()).scale(0.5)
}

pub fn sigma_from_cov(v: &CovMatrix) -> Result<SigmaMatrix> {
    v.to_sigma()
}

pub fn cov_from_sigma(s: &SigmaMatrix) -> Result<CovMatrix> {
    s.to_cov()
}

/// Covariance before the pulse: thermal mechanics and squeezed optical input.
pub fn initial_covariance(n_m: f64, squeeze: SqueezeSpec) -> Result<CovMatrix> {
    if !(n_m >= 0.0) {
        return Err(Error::domain(
            "initial_covariance",
            format!("n_m must be >= 0, got {n_m}"),
        ));
    }
    let th = 1.0 + 2.0 * n_m;
    let s = squeeze.factor();
    CovMatrix::new(Matrix::diag(&[0.5 * th, 0.5 * th, 0.5 * s, 0.5 / s]))
}

/// `U V Uᵀ`. No physicality assumption is made about `U`.
pub fn apply_symplectic(v: &CovMatrix, u: &Matrix) -> Result<CovMatrix> {
    if u.dim() != 4 {
        return Err(Error::domain(
            "apply_symplectic",
            "transformation must be 4x4",
        ));
    }
    CovMatrix::new(symmetrize(v.0.congruence(u)))
}

/// Phase-sensitive amplifier on the optical mode.
///
/// `gain` multiplies the X_C variance and `(1 + noise)/gain` multiplies the P_C
/// variance, so `10 log10(gain)` is the gain in dB. With `noise > 0` the map is a
/// congruence with a non-symplectic matrix and is checked for physicality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplifier {
    pub gain: f64,
    pub noise: f64,
}

impl Amplifier {
    pub fn new(gain: f64, noise: f64) -> Result<Self> {
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::domain(
                "amplifier",
                format!("gain must be > 0, got {gain}"),
            ));
        }
        if !(noise >= 0.0) {
            return Err(Error::domain(
                "amplifier",
                format!("noise must be >= 0, got {noise}"),
            ));
        }
        Ok(Amplifier { gain, noise })
    }

    pub fn from_db(db: f64, noise: f64) -> Result<Self> {
        Self::new(from_db(db), noise)
    }

    pub fn db(&self) -> f64 {
        to_db(self.gain)
    }

    /// Quadrature multipliers `(x, p)` applied to `(X_C, P_C)`.
    pub fn quadrature_scales(&self) -> (f64, f64) {
        (self.gain.sqrt(), ((1.0 + self.noise) / self.gain).sqrt())
    }

    pub fn phase_space_matrix(&self) -> Matrix {
        let (x, p) = self.quadrature_scales();
        Matrix::diag(&[1.0, 1.0, x, p])
    }
}

pub fn amplifier_map(v: &CovMatrix, amp: Amplifier) -> Result<CovMatrix> {
    let out = apply_symplectic(v, &amp.phase_space_matrix())?;
    if amp.noise > 0.0 {
        out.ensure_physical("amplifier_map")
    } else {
        Ok(out)
    }
}

/// Logarithmic negativity from the partially transposed symplectic eigenvalue.
pub fn logarithmic_negativity(v: &CovMatrix) -> Result<f64> {
    let mu = v.block_det(0, 0) + v.block_det(2, 2) - 2.0 * v.block_det(0, 2);
    let det = v.det();
    let mut disc = mu * mu - 4.0 * det;
    if disc < 0.0 {
        if disc < -1e-10 * (mu * mu).max(1e-300) {
            return Err(Error::numerical(
                "logarithmic_negativity",
                format!("mu^2 < 4 det V (mu = {mu:.6e}, det V = {det:.6e})"),
            ));
        }
        disc = 0.0;
    }
    // ν̃² = (μ - √disc)/2 = 2 det V / (μ + √disc)
    let nu2 = 2.0 * det / (mu + disc.sqrt());
    let nu = nu2.max(0.0).sqrt();
    Ok((-Real::ln(2.0 * nu)).max(0.0))
}

/// Gaussian EPR steering from the mechanical mode to the optical mode.
///
/// In the vacuum-½ convention the steerability is `½ ln(det V_M / (4 det V))`,
/// which vanishes on product vacua.
pub fn epr_steering_m_to_c(v: &CovMatrix) -> Result<f64> {
    let det = v.det();
    if !(det > 0.0) {
        return Err(Error::domain(
            "epr_steering_m_to_c",
            format!("det V must be > 0, got {det}"),
        ));
    }
    Ok((0.5 * Real::ln(v.block_det(0, 0) / (4.0 * det))).max(0.0))
}

/// Pure-loss channel of transmissivity `eta` on the optical mode, acting on σ.
///
/// Implements the six element maps for σ11, σ22, σ33, σ44, σ13, σ24 and leaves
/// every other entry untouched.
pub fn loss_channel_sigma(sigma: &SigmaMatrix, eta: f64) -> Result<SigmaMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(
            "loss_channel_sigma",
            format!("eta must lie in [0, 1], got {eta}"),
        ));
    }
    let s = |i, j| sigma.s(i, j);
    let dx = eta + (1.0 - eta) * s(3, 3);
    let dp = eta + (1.0 - eta) * s(4, 4);
    let mut m = sigma.m.clone();
    m[(0, 0)] = s(1, 1) - (1.0 - eta) * s(1, 3) * s(1, 3) / dx;
    m[(1, 1)] = s(2, 2) - (1.0 - eta) * s(2, 4) * s(2, 4) / dp;
    m[(2, 2)] = s(3, 3) / dx;
    m[(3, 3)] = s(4, 4) / dp;
    let s13 = eta.sqrt() * s(1, 3) / dx;
    let s24 = eta.sqrt() * s(2, 4) / dp;
    m[(0, 2)] = s13;
    m[(2, 0)] = s13;
    m[(1, 3)] = s24;
    m[(3, 1)] = s24;
    SigmaMatrix::new(m)
}

/// The same loss channel applied directly to the covariance matrix:
/// `V ↦ K V K + (1-η)/2 (0 ⊕ I)`, `K = 1 ⊕ √η I`.
pub fn loss_channel_cov(v: &CovMatrix, eta: f64) -> Result<CovMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(
            "loss_channel_cov",
            format!("eta must lie in [0, 1], got {eta}"),
        ));
    }
    let k = eta.sqrt();
    let mut m = v.0.congruence(&Matrix::diag(&[1.0, 1.0, k, k]));
    m[(2, 2)] += 0.5 * (1.0 - eta);
    m[(3, 3)] += 0.5 * (1.0 - eta);
    CovMatrix::new(symmetrize(m))
}

/// Covariance of a two-mode squeezed vacuum with squeezing `r`, in the
/// `(X_M, P_M, X_C, P_C)` ordering.
pub fn two_mode_squeezed_vacuum(r: f64) -> CovMatrix {
    let c = 0.5 * Real::cosh(2.0 * r);
    let s = 0.5 * Real::sinh(2.0 * r);
    CovMatrix(Matrix::from_rows([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vac() -> CovMatrix {
        CovMatrix::new(Matrix::identity(4).scale(0.5)).unwrap()
    }

    #[test]
    fn initial_covariance_examples() {
        let v = initial_covariance(0.0, SqueezeSpec::linear(1.0).unwrap()).unwrap();
        assert_eq!(v, vac());
        let v = initial_covariance(0.0, SqueezeSpec::from_db(-6.0).unwrap()).unwrap();
        assert!((v.get(2, 2) - 0.1256).abs() < 1e-4);
        assert!((v.get(3, 3) - 1.9905).abs() < 1e-4);
        let v = initial_covariance(0.05, SqueezeSpec::linear(0.5012).unwrap()).unwrap();
        assert!((v.get(0, 0) - 0.55).abs() < 1e-12 && (v.get(1, 1) - 0.55).abs() < 1e-12);
        assert!(initial_covariance(-0.1, SqueezeSpec::linear(1.0).unwrap()).is_err());
        assert!(SqueezeSpec::linear(0.0).is_err());
    }

    #[test]
    fn squeeze_db_round_trip() {
        for db in [-15.0, -6.0, -3.0, 0.0, 4.5] {
            let s = SqueezeSpec::from_db(db).unwrap();
            assert!((s.db() - db).abs() < 1e-12);
        }
    }

    #[test]
    fn physicality_checks() {
        let rep = vac().check_physical();
        assert!(rep.physical);
        assert!((rep.min_symplectic - 0.5).abs() < 1e-15);
        let below = CovMatrix::new(Matrix::identity(4).scale(0.4)).unwrap();
        assert!(!below.check_physical().physical);
        assert!(CovMatrix::new(Matrix::from_rows([
            [1.0, 0.2, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0]
        ]))
        .is_err());
    }

    #[test]
    fn symplectic_and_amplifier_examples() {
        let v = vac();
        assert_eq!(apply_symplectic(&v, &Matrix::identity(4)).unwrap(), v);
        let g = 3.0f64;
        let out = apply_symplectic(&v, &Matrix::diag(&[1.0, 1.0, g, 1.0 / g])).unwrap();
        assert!((out.get(2, 2) - g * g / 2.0).abs() < 1e-15);
        assert!((out.get(3, 3) - 1.0 / (2.0 * g * g)).abs() < 1e-15);

        let amp = amplifier_map(&v, Amplifier::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(amp, v);
        // power gain 4 is a quadrature gain of 2
        let amp = amplifier_map(&v, Amplifier::new(4.0, 0.0).unwrap()).unwrap();
        assert!((amp.get(2, 2) - 2.0).abs() < 1e-15 && (amp.get(3, 3) - 0.125).abs() < 1e-15);
        let amp = amplifier_map(&v, Amplifier::new(4.0, 0.16).unwrap()).unwrap();
        assert!((amp.get(3, 3) - 1.16 / 8.0).abs() < 1e-15);
        assert!(Amplifier::new(0.0, 0.0).is_err());
        assert!(
            (Amplifier::new(4.0, 0.16).unwrap().quadrature_scales().1
                * Amplifier::new(4.0, 0.16).unwrap().quadrature_scales().1
                * 4.0
                - 1.16)
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn tmsv_measures() {
        for r in [0.1, 0.5, 1.0] {
            let v = two_mode_squeezed_vacuum(r);
            assert!(v.check_physical().physical);
            assert!((logarithmic_negativity(&v).unwrap() - 2.0 * r).abs() < 1e-9);
            let g = epr_steering_m_to_c(&v).unwrap();
            assert!(
                (g - Real::ln(Real::cosh(2.0 * r))).abs() < 1e-9,
                "r={r}: {g}"
            );
        }
        assert_eq!(logarithmic_negativity(&vac()).unwrap(), 0.0);
        assert_eq!(epr_steering_m_to_c(&vac()).unwrap(), 0.0);
    }

    #[test]
    fn loss_channel_limits() {
        let v = two_mode_squeezed_vacuum(0.4);
        let s = v.to_sigma().unwrap();
        let same = loss_channel_sigma(&s, 1.0).unwrap();
        assert!(same.matrix().max_abs_diff(s.matrix()) < 1e-15);
        let gone = loss_channel_sigma(&s, 0.0).unwrap();
        assert_eq!(gone.s(1, 3), 0.0);
        assert!((gone.s(3, 3) - 1.0).abs() < 1e-15);
        assert!(loss_channel_sigma(&s, 1.2).is_err());
    }

    #[test]
    fn loss_sigma_map_equals_covariance_map() {
        let v = two_mode_squeezed_vacuum(0.7);
        for eta in [0.0, 0.3, 0.9] {
            let a = loss_channel_sigma(&v.to_sigma().unwrap(), eta)
                .unwrap()
                .to_cov()
                .unwrap();
            let b = loss_channel_cov(&v, eta).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }

    fn arb_physical() -> impl Strategy<Value = CovMatrix> {
        // local squeezers and a beam splitter acting on a thermal product state
        (
            0.0f64..0.5,
            0.0f64..0.5,
            -1.0f64..1.0,
            -1.0f64..1.0,
            0.0f64..1.5,
            -1.0f64..1.0,
        )
            .prop_map(|(n1, n2, r1, r2, th, r3)| {
                let base = Matrix::diag(&[0.5 + n1, 0.5 + n1, 0.5 + n2, 0.5 + n2]);
                let sq =
                    Matrix::diag(&[Real::exp(r1), Real::exp(-r1), Real::exp(r2), Real::exp(-r2)]);
                let (c, s) = (Real::cos(th), Real::sin(th));
                let bs = Matrix::from_rows([
                    [c, 0.0, s, 0.0],
                    [0.0, c, 0.0, s],
                    [-s, 0.0, c, 0.0],
                    [0.0, -s, 0.0, c],
                ]);
                let sq2 = Matrix::diag(&[Real::exp(r3), Real::exp(-r3), 1.0, 1.0]);
                let m = base.congruence(&sq).congruence(&bs).congruence(&sq2);
                CovMatrix::new(symmetrize(m)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn sigma_round_trip(v in arb_physical()) {
            let back = v.to_sigma().unwrap().to_cov().unwrap();
            prop_assert!(back.matrix().max_abs_diff(v.matrix()) <= 1e-10 * v.matrix().max_abs());
        }

        #[test]
        fn channels_preserve_physicality(v in arb_physical(), eta in 0.0f64..=1.0, g in 0.1f64..10.0) {
            prop_assert!(v.check_physical().physical);
            prop_assert!(loss_channel_cov(&v, eta).unwrap().check_physical().physical);
            let amp = amplifier_map(&v, Amplifier::new(g, 0.0).unwrap()).unwrap();
            prop_assert!(amp.check_physical().physical);
            let lossy = loss_channel_sigma(&v.to_sigma().unwrap(), eta).unwrap().to_cov().unwrap();
            prop_assert!(lossy.check_physical().physical);
        }

        #[test]
        fn steering_implies_entanglement(v in arb_physical()) {
            if epr_steering_m_to_c(&v).unwrap() > 1e-12 {
                prop_assert!(logarithmic_negativity(&v).unwrap() > 0.0);
            }
        }
    }
}

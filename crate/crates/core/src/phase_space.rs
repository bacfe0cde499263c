//! Wigner functions of the form polynomial × Gaussian.
//!
//! A [`PolyGaussian`] stores `W(u) = q(u) · N(u; m, V)` where `N` is the
//! normalized Gaussian density with mean `m` and covariance `V`. All operators
//! below act exactly on `q`, `m` and `V`; grids are only produced on request.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{Amplifier, CovMatrix, SigmaMatrix};
use crate::linalg::Matrix;
use crate::poly::{Affine, MultiPoly, MAX_VARS};
use crate::quad::{integrate, real_roots, truncated_normal_moments};
use crate::real::Real;

/// Phase-space coordinates, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    XM,
    PM,
    XC,
    PC,
    /// Vacuum ancilla quadratures used internally for loss channels.
    XE,
    PE,
}

pub const JOINT_AXES: [Axis; 4] = [Axis::XM, Axis::PM, Axis::XC, Axis::PC];

const CHOLESKY_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyGaussian {
    axes: Vec<Axis>,
    poly: MultiPoly,
    mean: Vec<f64>,
    cov: Matrix,
}

fn mono(nvars: usize, exps: &[(usize, u16)]) -> MultiPoly {
    let mut e = [0; MAX_VARS];
    for &(i, k) in exps {
        e[i] = k;
    }
    let mut p = MultiPoly::zero(nvars);
    p.add_term(e, 1.0);
    p
}

/// Kalman-type conditioning of `N(m, V)` on a noisy observation `wᵀu = y`
/// with noise variance `r`. Returns the posterior and the evidence density.
fn condition_on_linear(
    mean: &[f64],
    cov: &Matrix,
    w: &[f64],
    y: f64,
    r: f64,
) -> (Vec<f64>, Matrix, f64) {
    let n = mean.len();
    let vw = cov.mul_vec(w);
    let s: f64 = w.iter().zip(&vw).map(|(a, b)| a * b).sum::<f64>() + r;
    let pred: f64 = w.iter().zip(mean).map(|(a, b)| a * b).sum();
    let innov = y - pred;
    let m: Vec<f64> = (0..n).map(|i| mean[i] + vw[i] * innov / s).collect();
    let mut v = cov.clone();
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] -= vw[i] * vw[j] / s;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (v[(i, j)] + v[(j, i)]);
            v[(i, j)] = a;
            v[(j, i)] = a;
        }
    }
    let evidence = Real::exp(-0.5 * innov * innov / s) / (2.0 * PI * s).sqrt();
    (m, v, evidence)
}

impl PolyGaussian {
    /// Wigner function of the zero-mean Gaussian state with covariance `v`.
    pub fn gaussian_wigner(v: &CovMatrix) -> Self {
        PolyGaussian {
            axes: JOINT_AXES.to_vec(),
            poly: MultiPoly::one(4),
            mean: vec![0.0; 4],
            cov: v.matrix().clone(),
        }
    }

    pub fn from_parts(
        axes: Vec<Axis>,
        poly: MultiPoly,
        mean: Vec<f64>,
        cov: Matrix,
    ) -> Result<Self> {
        let n = axes.len();
        if n == 0 || poly.nvars() != n || mean.len() != n || cov.dim() != n {
            return Err(Error::contract(
                "PolyGaussian",
                "axes, polynomial, mean and covariance sizes differ",
            ));
        }
        if cov.cholesky_psd(CHOLESKY_TOL).is_none() {
            return Err(Error::domain(
                "PolyGaussian",
                "covariance is not positive semidefinite",
            ));
        }
        Ok(PolyGaussian {
            axes,
            poly,
            mean,
            cov,
        })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn nvars(&self) -> usize {
        self.axes.len()
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    fn index_of(&self, a: Axis) -> Option<usize> {
        self.axes.iter().position(|&x| x == a)
    }

    fn require_joint(&self, op: &'static str) -> Result<()> {
        if self.axes != JOINT_AXES {
            return Err(Error::contract(
                op,
                format!(
                    "expected the joint (X_M, P_M, X_C, P_C) state, got {:?}",
                    self.axes
                ),
            ));
        }
        Ok(())
    }

    fn precision(&self, op: &'static str) -> Result<Matrix> {
        self.cov
            .inverse()
            .map(|i| i.matrix)
            .ok_or_else(|| Error::numerical(op, "Gaussian covariance is singular"))
    }

    pub fn gaussian_density(&self, u: &[f64]) -> f64 {
        let n = self.nvars();
        let p = match self.cov.inverse() {
            Some(i) => i.matrix,
            None => return 0.0,
        };
        let d: Vec<f64> = (0..n).map(|i| u[i] - self.mean[i]).collect();
        let pd = p.mul_vec(&d);
        let q: f64 = d.iter().zip(&pd).map(|(a, b)| a * b).sum();
        Real::exp(-0.5 * q) / (Real::powi(2.0 * PI, n as i32) * self.cov.det()).sqrt()
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.poly.eval(u) * self.gaussian_density(u)
    }

    /// `∫ q(u) W(u) du` for a polynomial `q` over the same variables.
    pub fn expectation(&self, q: &MultiPoly) -> Result<f64> {
        let n = self.nvars();
        let l = self.cov.cholesky_psd(CHOLESKY_TOL).ok_or_else(|| {
            Error::numerical("expectation", "covariance is not positive semidefinite")
        })?;
        let forms: Vec<Affine> = (0..n)
            .map(|i| Affine {
                constant: self.mean[i],
                coeffs: (0..n).map(|k| l[(i, k)]).collect(),
            })
            .collect();
        let integrand = self.poly.mul(q).substitute(&forms, n);
        Ok(integrand.integrate_standard_normal(0).coeff(&[]))
    }

    /// `∫ W`.
    pub fn total(&self) -> Result<f64> {
        self.expectation(&MultiPoly::one(self.nvars()))
    }

    pub fn moment(&self, exps: &[(Axis, u16)]) -> Result<f64> {
        let mut idx = Vec::new();
        for &(a, k) in exps {
            let i = self
                .index_of(a)
                .ok_or_else(|| Error::contract("moment", format!("axis {a:?} not present")))?;
            idx.push((i, k));
        }
        self.expectation(&mono(self.nvars(), &idx))
    }

    /// Rescales to unit integral; also returns the previous integral.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let t = self.total()?;
        if !(t.abs() > 0.0) || !t.is_finite() {
            return Err(Error::ZeroWeight {
                stage: 0,
                detail: format!("integral of the state is {t:e}"),
            });
        }
        Ok((
            PolyGaussian {
                poly: self.poly.scale(1.0 / t),
                ..self.clone()
            },
            t,
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        PolyGaussian {
            poly: self.poly.scale(s),
            ..self.clone()
        }
    }

    /// Sum of two states sharing the same Gaussian part.
    pub fn add_same_gaussian(&self, other: &Self) -> Result<Self> {
        if self.axes != other.axes
            || self
                .mean
                .iter()
                .zip(&other.mean)
                .any(|(a, b)| (a - b).abs() > 1e-12)
            || self.cov.max_abs_diff(&other.cov) > 1e-12
        {
            return Err(Error::contract(
                "add_same_gaussian",
                "states differ in variables or Gaussian part",
            ));
        }
        Ok(PolyGaussian {
            poly: self.poly.add(&other.poly),
            ..self.clone()
        })
    }

    /// One photon subtracted from the optical mode. The result is not
    /// normalized; its integral is the mean photon number of the input.
    pub fn subtract_photon(&self) -> Result<Self> {
        self.require_joint("subtract_photon")?;
        let p = self.precision("subtract_photon")?;
        let n = 4;
        // ℓ_i = (V⁻¹(u - m))_i, so ∂_i(qN) = (∂_i q - ℓ_i q) N
        let ell = |i: usize| -> MultiPoly {
            let mut a = Affine {
                constant: 0.0,
                coeffs: vec![0.0; n],
            };
            for j in 0..n {
                a.coeffs[j] = p[(i, j)];
                a.constant -= p[(i, j)] * self.mean[j];
            }
            MultiPoly::from_affine(n, &a)
        };
        let l3 = ell(2);
        let l4 = ell(3);
        let d = |q: &MultiPoly, i: usize, l: &MultiPoly| q.deriv(i).sub(&l.mul(q));
        let q = &self.poly;
        let d3 = d(q, 2, &l3);
        let d4 = d(q, 3, &l4);
        let d33 = d(&d3, 2, &l3);
        let d44 = d(&d4, 3, &l4);
        let radial = mono(n, &[(2, 2)])
            .add(&mono(n, &[(3, 2)]))
            .add(&MultiPoly::one(n));
        let out = radial
            .mul(q)
            .add(&d3.mul_var(2))
            .add(&d4.mul_var(3))
            .add(&d33.add(&d44).scale(0.25))
            .scale(0.5);
        let scale = q.max_abs_coeff()
            * Real::powi(
                1.0 + p.max_abs() + self.mean.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                2,
            );
        let out = if out.max_abs_coeff() <= 1e-13 * scale {
            MultiPoly::zero(n)
        } else {
            out.prune(1e-16)
        };
        Ok(PolyGaussian {
            poly: out,
            ..self.clone()
        })
    }

    pub fn subtract_photons(&self, n: usize) -> Result<Self> {
        let mut w = self.clone();
        for _ in 0..n {
            w = w.subtract_photon()?;
        }
        Ok(w)
    }

    /// Phase-sensitive amplifier on the optical mode, acting as the linear map
    /// `X_C ↦ √g X_C`, `P_C ↦ √((1+n)/g) P_C` on the density.
    pub fn amplify(&self, amp: Amplifier) -> Result<Self> {
        self.require_joint("amplify")?;
        let (sx, sp) = amp.quadrature_scales();
        let scales = [1.0, 1.0, sx, sp];
        let d = Matrix::diag(&scales);
        let forms: Vec<Affine> = (0..4)
            .map(|i| {
                let mut a = Affine::var(4, i);
                a.coeffs[i] = 1.0 / scales[i];
                a
            })
            .collect();
        Ok(PolyGaussian {
            axes: self.axes.clone(),
            poly: self.poly.substitute(&forms, 4),
            mean: (0..4).map(|i| self.mean[i] * scales[i]).collect(),
            cov: self.cov.congruence(&d),
        })
    }

    /// Pure loss of transmissivity `eta` on the optical mode: a beam splitter
    /// with a vacuum ancilla that is then traced out.
    pub fn optical_loss(&self, eta: f64) -> Result<Self> {
        self.require_joint("optical_loss")?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain(
                "optical_loss",
                format!("eta must lie in (0, 1], got {eta}"),
            ));
        }
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
        // orthogonal map A on (u, v): u_C' = t u_C + r v, v' = -r u_C + t v
        let mut a = Matrix::identity(6);
        for k in 0..2 {
            let (c, e) = (2 + k, 4 + k);
            a[(c, c)] = t;
            a[(c, e)] = r;
            a[(e, c)] = -r;
            a[(e, e)] = t;
        }
        let mut cov = Matrix::zeros(6);
        for i in 0..4 {
            for j in 0..4 {
                cov[(i, j)] = self.cov[(i, j)];
            }
        }
        cov[(4, 4)] = 0.5;
        cov[(5, 5)] = 0.5;
        let mut mean6 = self.mean.clone();
        mean6.extend([0.0, 0.0]);
        // W'(y) = W(Aᵀ y)
        let forms: Vec<Affine> = (0..6)
            .map(|i| Affine {
                constant: 0.0,
                coeffs: (0..6).map(|j| a[(j, i)]).collect(),
            })
            .collect();
        let mut embed = vec![
            Affine {
                constant: 0.0,
                coeffs: vec![0.0; 6]
            };
            4
        ];
        for (i, f) in embed.iter_mut().enumerate() {
            f.coeffs[i] = 1.0;
        }
        let poly6 = self.poly.substitute(&embed, 6).substitute(&forms, 6);
        let mut axes = self.axes.clone();
        axes.extend([Axis::XE, Axis::PE]);
        let joint = PolyGaussian {
            axes,
            poly: poly6,
            mean: a.mul_vec(&mean6),
            cov: cov.congruence(&a),
        };
        joint.marginal(&JOINT_AXES)
    }

    /// Exact marginal over the kept axes.
    pub fn marginal(&self, keep: &[Axis]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::domain("marginal", "keep set is empty"));
        }
        let mut a_idx = Vec::new();
        for &k in keep {
            let i = self
                .index_of(k)
                .ok_or_else(|| Error::contract("marginal", format!("axis {k:?} not present")))?;
            if a_idx.contains(&i) {
                return Err(Error::contract("marginal", format!("axis {k:?} repeated")));
            }
            a_idx.push(i);
        }
        let b_idx: Vec<usize> = (0..self.nvars()).filter(|i| !a_idx.contains(i)).collect();
        if b_idx.is_empty() {
            let forms: Vec<Affine> = (0..self.nvars())
                .map(|i| Affine::var(a_idx.len(), a_idx.iter().position(|&x| x == i).unwrap()))
                .collect();
            return Ok(PolyGaussian {
                axes: keep.to_vec(),
                poly: self.poly.substitute(&forms, a_idx.len()),
                mean: a_idx.iter().map(|&i| self.mean[i]).collect(),
                cov: self.cov.principal(&a_idx),
            });
        }
        let na = a_idx.len();
        let nb = b_idx.len();
        let vaa = self.cov.principal(&a_idx);
        let vbb = self.cov.principal(&b_idx);
        let vba = self.cov.submatrix(&b_idx, &a_idx);
        let vaa_inv = vaa
            .inverse()
            .ok_or_else(|| Error::numerical("marginal", "kept covariance block is singular"))?
            .matrix;
        // b | a ~ N(m_b + K (a - m_a), V_bb - K V_ab)
        let k = vba.mul_square(&vaa_inv);
        let mut vc = vbb.clone();
        for i in 0..nb {
            for j in 0..nb {
                let s: f64 = (0..na).map(|t| k.get(i, t) * vba.get(j, t)).sum();
                vc[(i, j)] -= s;
            }
        }
        for i in 0..nb {
            for j in (i + 1)..nb {
                let a = 0.5 * (vc[(i, j)] + vc[(j, i)]);
                vc[(i, j)] = a;
                vc[(j, i)] = a;
            }
        }
        let l = vc.cholesky_psd(1e-12).ok_or_else(|| {
            Error::numerical(
                "marginal",
                "conditional covariance is not positive semidefinite",
            )
        })?;
        let total = na + nb;
        let mut forms = vec![
            Affine {
                constant: 0.0,
                coeffs: vec![0.0; total]
            };
            self.nvars()
        ];
        for (pos, &i) in a_idx.iter().enumerate() {
            forms[i].coeffs[pos] = 1.0;
        }
        for (bj, &j) in b_idx.iter().enumerate() {
            let f = &mut forms[j];
            f.constant = self.mean[j];
            for (pos, &i) in a_idx.iter().enumerate() {
                f.coeffs[pos] += k.get(bj, pos);
                f.constant -= k.get(bj, pos) * self.mean[i];
            }
            for w in 0..nb {
                f.coeffs[na + w] = l[(bj, w)];
            }
        }
        let poly = self
            .poly
            .substitute(&forms, total)
            .integrate_standard_normal(na);
        Ok(PolyGaussian {
            axes: keep.to_vec(),
            poly,
            mean: a_idx.iter().map(|&i| self.mean[i]).collect(),
            cov: vaa,
        })
    }

    /// Homodyne measurement of `X_θ = cos θ X_C + sin θ P_C` with outcome `ζ`,
    /// Gaussian resolution `ε` and detection efficiency `μ`, followed by the
    /// partial trace over the optical mode. The result is left unnormalized;
    /// its integral is the outcome probability density.
    pub fn project(&self, m: &Measurement) -> Result<Self> {
        if !(m.epsilon > 0.0) {
            return Err(Error::domain(
                "project",
                format!("epsilon must be > 0, got {}", m.epsilon),
            ));
        }
        self.project_inner(m)
    }

    /// The `ε → 0` limit of [`project`](Self::project): conditioning on the
    /// sharp slice `X_θ = ζ`.
    pub fn project_slice(&self, m: &Measurement) -> Result<Self> {
        self.project_inner(&Measurement { epsilon: 0.0, ..*m })
    }

    fn project_inner(&self, m: &Measurement) -> Result<Self> {
        self.require_joint("project")?;
        if !(m.efficiency > 0.0 && m.efficiency <= 1.0) {
            return Err(Error::domain(
                "project",
                format!("efficiency must lie in (0, 1], got {}", m.efficiency),
            ));
        }
        let mu = m.efficiency;
        // detector loss folds into the window: exp(-(√μ X_θ - ζ)²/2s²), s² = ε² + (1-μ)/2
        let s2 = m.epsilon * m.epsilon + 0.5 * (1.0 - mu);
        let w = [0.0, 0.0, Real::cos(m.theta), Real::sin(m.theta)];
        let (mean, cov, evidence) =
            condition_on_linear(&self.mean, &self.cov, &w, m.zeta / mu.sqrt(), s2 / mu);
        let conditioned = PolyGaussian {
            axes: self.axes.clone(),
            poly: self.poly.scale(evidence / mu.sqrt()),
            mean,
            cov,
        };
        conditioned.marginal(&[Axis::XM, Axis::PM])
    }

    /// Samples a two-variable state on a rectangular grid.
    pub fn evaluate_grid(&self, grid: &GridSpec) -> Result<Grid> {
        self.require_plane("evaluate_grid")?;
        grid.validate()?;
        let xs = grid.x_points();
        let mut values = Vec::with_capacity(grid.nx * grid.np);
        for p in grid.p_points() {
            values.extend(self.evaluate_row(p, &xs)?);
        }
        Ok(Grid::new(*grid, values))
    }

    /// One row of constant `P`; rows can be computed independently.
    pub fn evaluate_row(&self, p: f64, xs: &[f64]) -> Result<Vec<f64>> {
        self.require_plane("evaluate_row")?;
        let prec = self.precision("evaluate_row")?;
        let norm = 1.0 / (2.0 * PI * self.cov.det().sqrt());
        Ok(xs
            .iter()
            .map(|&x| {
                let dx = x - self.mean[0];
                let dp = p - self.mean[1];
                let q =
                    prec[(0, 0)] * dx * dx + 2.0 * prec[(0, 1)] * dx * dp + prec[(1, 1)] * dp * dp;
                self.poly.eval(&[x, p]) * norm * Real::exp(-0.5 * q)
            })
            .collect())
    }

    fn require_plane(&self, op: &'static str) -> Result<()> {
        if self.nvars() != 2 {
            return Err(Error::contract(
                op,
                format!("expected a single-mode state, got axes {:?}", self.axes),
            ));
        }
        Ok(())
    }

    /// `δ = ∬ (|W| - W)`, integrating exactly along `X` between the sign
    /// changes of the polynomial and adaptively along `P`.
    pub fn wigner_negativity(&self) -> Result<Negativity> {
        self.require_plane("wigner_negativity")?;
        let t = self.total()?;
        if (t - 1.0).abs() > 1e-6 {
            return Err(Error::contract(
                "wigner_negativity",
                format!("state is not normalized (integral {t})"),
            ));
        }
        if self.poly.degree() == 0 {
            return Ok(Negativity {
                delta: 0.0,
                error: 0.0,
            });
        }
        let (vxx, vxp, vpp) = (self.cov[(0, 0)], self.cov[(0, 1)], self.cov[(1, 1)]);
        let (mx, mp) = (self.mean[0], self.mean[1]);
        let cond_var = vxx - vxp * vxp / vpp;
        if !(cond_var > 0.0 && vpp > 0.0) {
            return Err(Error::numerical(
                "wigner_negativity",
                "degenerate Gaussian part",
            ));
        }
        let sd = cond_var.sqrt();
        let deg = self.poly.degree_in(0) as usize;
        let row = |p: f64| -> f64 {
            let c = self.poly.restrict_to_line(0, &[0.0, p]);
            let cm = mx + vxp / vpp * (p - mp);
            // q(cm + sd t) as a polynomial in t
            let mut ct = vec![0.0; deg + 1];
            let mut binom = vec![1.0; deg + 1];
            for (k, &ck) in c.iter().enumerate() {
                if ck == 0.0 {
                    continue;
                }
                for j in 0..=k {
                    if j > 0 {
                        binom[j] = binom[j - 1] * (k - j + 1) as f64 / j as f64;
                    }
                    ct[j] +=
                        ck * binom[j] * Real::powi(cm, (k - j) as i32) * Real::powi(sd, j as i32);
                }
            }
            let mut cuts = vec![f64::NEG_INFINITY];
            cuts.extend(real_roots(&ct));
            cuts.push(f64::INFINITY);
            let mut neg = 0.0;
            for w in cuts.windows(2) {
                let probe = if w[0].is_infinite() && w[1].is_infinite() {
                    0.0
                } else if w[0].is_infinite() {
                    w[1] - 1.0
                } else if w[1].is_infinite() {
                    w[0] + 1.0
                } else {
                    0.5 * (w[0] + w[1])
                };
                if crate::quad::eval_poly(&ct, probe) < 0.0 {
                    let j = truncated_normal_moments(w[0], w[1], deg);
                    neg += ct.iter().zip(&j).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            let dp = p - mp;
            -2.0 * neg * Real::exp(-0.5 * dp * dp / vpp) / (2.0 * PI * vpp).sqrt()
        };
        // fringes can be narrow compared with the envelope, so start from panels
        let half = 14.0 * vpp.sqrt();
        let panels = 112;
        let width = 2.0 * half / panels as f64;
        let (mut delta, mut error) = (0.0, 0.0);
        for k in 0..panels {
            let a = mp - half + k as f64 * width;
            let r = integrate(&row, a, a + width, 1e-13, 1e-10);
            delta += r.value;
            error += r.error;
        }
        Ok(Negativity {
            delta: delta.max(0.0),
            error,
        })
    }

    /// `π W(0, 0)`, the expectation of the parity operator.
    pub fn parity(&self) -> Result<f64> {
        self.require_plane("parity")?;
        Ok(PI * self.eval(&[0.0, 0.0]))
    }
}

/// Homodyne setting on the optical mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub theta: f64,
    pub zeta: f64,
    pub epsilon: f64,
    pub efficiency: f64,
}

impl Measurement {
    pub fn new(theta: f64, zeta: f64, epsilon: f64, efficiency: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::domain(
                "Measurement",
                format!("epsilon must be > 0, got {epsilon}"),
            ));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::domain(
                "Measurement",
                format!("efficiency must lie in (0, 1], got {efficiency}"),
            ));
        }
        if !theta.is_finite() || !zeta.is_finite() {
            return Err(Error::domain(
                "Measurement",
                "theta and zeta must be finite",
            ));
        }
        Ok(Measurement {
            theta,
            zeta,
            epsilon,
            efficiency,
        })
    }

    /// `X_C = 0` with resolution 0.1 and unit efficiency.
    pub fn ideal() -> Self {
        Measurement {
            theta: 0.0,
            zeta: 0.0,
            epsilon: 0.1,
            efficiency: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Negativity {
    pub delta: f64,
    pub error: f64,
}

/// Rectangular grid over `(X, P)`; both ends included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(-6.0, 6.0, 241)
    }
}

impl GridSpec {
    pub fn square(min: f64, max: f64, n: usize) -> Self {
        GridSpec {
            x_min: min,
            x_max: max,
            nx: n,
            p_min: min,
            p_max: max,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::domain(
                "GridSpec",
                format!("degenerate grid {self:?}"),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x_points(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|i| self.x_min + i as f64 * self.dx())
            .collect()
    }

    pub fn p_points(&self) -> Vec<f64> {
        (0..self.np)
            .map(|i| self.p_min + i as f64 * self.dp())
            .collect()
    }
}

/// Sampled Wigner function, rows of constant `P`, `X` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub riemann_sum: f64,
    pub boundary_max: f64,
}

impl Grid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Self {
        let riemann_sum = values.iter().sum::<f64>() * spec.dx() * spec.dp();
        let mut boundary_max: f64 = 0.0;
        for j in 0..spec.np {
            for i in 0..spec.nx {
                if i == 0 || j == 0 || i == spec.nx - 1 || j == spec.np - 1 {
                    boundary_max = boundary_max.max(values[j * spec.nx + i].abs());
                }
            }
        }
        Grid {
            spec,
            values,
            riemann_sum,
            boundary_max,
        }
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.spec.nx + ix]
    }

    /// Riemann sum within 1e-4 of one.
    pub fn normalization_ok(&self) -> bool {
        (self.riemann_sum - 1.0).abs() <= 1e-4
    }

    /// The field is not negligible on the border of the window.
    pub fn clipped(&self) -> bool {
        self.boundary_max > 1e-6
    }

    /// `∬ (|W| - W)` by the Riemann sum of the samples.
    pub fn negativity(&self) -> f64 {
        self.values.iter().map(|w| w.abs() - w).sum::<f64>() * self.spec.dx() * self.spec.dp()
    }

    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `Q_n` such that `n` photon subtractions map `W_G(V)` to a multiple of
/// `Q_n W_G(V)` (zero-mean Gaussian states).
pub fn qn_polynomial(sigma: &SigmaMatrix, n: i64) -> Result<MultiPoly> {
    if n < 0 {
        return Err(Error::domain(
            "qn_polynomial",
            format!("photon number must be >= 0, got {n}"),
        ));
    }
    let s = |i, j| sigma.s(i, j);
    let lx = MultiPoly::var(4, 2)
        .scale(s(3, 3) - 1.0)
        .add(&MultiPoly::var(4, 0).scale(s(1, 3)));
    let lp = MultiPoly::var(4, 3)
        .scale(s(4, 4) - 1.0)
        .add(&MultiPoly::var(4, 1).scale(s(2, 4)));
    let q1 = MultiPoly::constant(4, 1.0 - 0.5 * (s(3, 3) + s(4, 4)))
        .add(&lx.mul(&lx))
        .add(&lp.mul(&lp));
    let mut q = MultiPoly::one(4);
    for k in 0..n {
        q = if k == 0 {
            q1.clone()
        } else {
            q1.mul(&q)
                .sub(&lx.mul(&q.deriv(2)))
                .sub(&lp.mul(&q.deriv(3)))
                .add(&q.deriv(2).deriv(2).add(&q.deriv(3).deriv(3)).scale(0.25))
        };
    }
    Ok(q)
}

//! Target states and figures of merit for the conditioned mechanical state.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use crate::real::{polar, Real};
pub use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::from_db;
use crate::phase_space::{Axis, Grid, GridSpec, PolyGaussian};

/// Ideal pure states, optionally squeezed: a squeeze of `s` dB multiplies the
/// X variance by `10^(s/10)` and divides the P variance by the same factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetState {
    /// `N (|α⟩ + parity |−α⟩)`, `parity = ±1`.
    Cat {
        alpha: Complex64,
        parity: i32,
        squeeze_db: f64,
    },
    Fock {
        n: usize,
        squeeze_db: f64,
    },
    /// Equal superposition of `|α0 e^{i(2k−1)π/4}⟩`, `k = 1..4`.
    FourCat {
        alpha0: f64,
        squeeze_db: f64,
    },
}

fn coherent(alpha: Complex64, x: f64) -> Complex64 {
    let (ar, ai) = (alpha.re, alpha.im);
    let d = x - SQRT_2 * ar;
    let amp = Real::powf(PI, -0.25) * Real::exp(-0.5 * d * d);
    polar(amp, SQRT_2 * ai * x - ar * ai)
}

fn fock(n: usize, x: f64) -> f64 {
    // normalized Hermite functions by upward recursion
    let mut h0 = Real::powf(PI, -0.25) * Real::exp(-0.5 * x * x);
    if n == 0 {
        return h0;
    }
    let mut h1 = SQRT_2 * x * h0;
    for k in 1..n {
        let h2 = (2.0 / (k + 1) as f64).sqrt() * x * h1 - (k as f64 / (k + 1) as f64).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

const WF_HALF_WIDTH: f64 = 12.0;
const WF_POINTS: usize = 961;

impl TargetState {
    pub fn even_cat(alpha: Complex64) -> Self {
        TargetState::Cat {
            alpha,
            parity: 1,
            squeeze_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TargetState::Cat {
                alpha,
                parity,
                squeeze_db,
            } => {
                if parity != 1 && parity != -1 {
                    return Err(Error::domain(
                        "TargetState",
                        format!("cat parity must be ±1, got {parity}"),
                    ));
                }
                if parity == -1 && alpha.norm_sqr() == 0.0 {
                    return Err(Error::domain(
                        "TargetState",
                        "odd cat with zero amplitude vanishes",
                    ));
                }
                if !squeeze_db.is_finite() || !alpha.re.is_finite() || !alpha.im.is_finite() {
                    return Err(Error::domain("TargetState", "non-finite parameter"));
                }
            }
            TargetState::Fock { squeeze_db, .. } | TargetState::FourCat { squeeze_db, .. } => {
                if !squeeze_db.is_finite() {
                    return Err(Error::domain("TargetState", "non-finite squeezing"));
                }
            }
        }
        Ok(())
    }

    fn squeeze_db(&self) -> f64 {
        match *self {
            TargetState::Cat { squeeze_db, .. }
            | TargetState::Fock { squeeze_db, .. }
            | TargetState::FourCat { squeeze_db, .. } => squeeze_db,
        }
    }

    fn unsqueezed(&self, x: f64) -> Complex64 {
        match *self {
            TargetState::Cat { alpha, parity, .. } => {
                coherent(alpha, x) + coherent(-alpha, x) * parity as f64
            }
            TargetState::Fock { n, .. } => Complex64::new(fock(n, x), 0.0),
            TargetState::FourCat { alpha0, .. } => (1..=4)
                .map(|k| coherent(polar(alpha0, (2 * k - 1) as f64 * FRAC_PI_4), x))
                .sum(),
        }
    }

    /// Wave function in the X representation.
    pub fn wavefunction(&self) -> Result<TargetWave> {
        self.validate()?;
        let s = from_db(self.squeeze_db()).sqrt();
        let h = 2.0 * WF_HALF_WIDTH / (WF_POINTS - 1) as f64;
        let raw = |x: f64| self.unsqueezed(x / s) / s.sqrt();
        let norm2: f64 = (0..WF_POINTS)
            .map(|i| raw(-WF_HALF_WIDTH + i as f64 * h).norm_sqr())
            .sum::<f64>()
            * h;
        if !(norm2 > 0.0) {
            return Err(Error::ZeroWeight {
                stage: 0,
                detail: "target state vanishes".into(),
            });
        }
        Ok(TargetWave {
            target: *self,
            scale: s,
            norm: 1.0 / norm2.sqrt(),
        })
    }
}

/// A normalized target wave function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetWave {
    pub target: TargetState,
    scale: f64,
    norm: f64,
}

impl TargetWave {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.target.unsqueezed(x / self.scale) * (self.norm / self.scale.sqrt())
    }

    /// `W(x, p) = (1/π) ∫ ψ*(x+y) ψ(x−y) e^{2ipy} dy`.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let h = 0.02;
        let n = (WF_HALF_WIDTH / h) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            let y = k as f64 * h;
            acc += self.eval(x + y).conj() * self.eval(x - y) * polar(1.0, 2.0 * p * y);
        }
        acc.re * h / PI
    }

    pub fn wigner_grid(&self, grid: &GridSpec) -> Result<Grid> {
        grid.validate()?;
        let xs = grid.x_points();
        let mut values = Vec::with_capacity(grid.nx * grid.np);
        for p in grid.p_points() {
            for &x in &xs {
                values.push(self.wigner(x, p));
            }
        }
        Ok(Grid::new(*grid, values))
    }

    pub fn overlap(&self, other: &TargetWave) -> Complex64 {
        let h = 2.0 * WF_HALF_WIDTH / (WF_POINTS - 1) as f64;
        (0..WF_POINTS)
            .map(|i| {
                let x = -WF_HALF_WIDTH + i as f64 * h;
                self.eval(x).conj() * other.eval(x)
            })
            .sum::<Complex64>()
            * h
    }
}

/// `ρ(x, x')` of a single-mode state stored as polynomial × Gaussian, on a
/// uniform grid.
struct DensityMatrix {
    xs: Vec<f64>,
    h: f64,
    rho: Vec<Complex64>,
}

fn density_matrix(w: &PolyGaussian, half_width: f64, h: f64) -> Result<DensityMatrix> {
    if w.axes() != [Axis::XM, Axis::PM] {
        return Err(Error::contract(
            "density_matrix",
            format!("expected (X_M, P_M), got {:?}", w.axes()),
        ));
    }
    let cov = w.cov();
    let (vqq, vqp, vpp) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let (mq, mp) = (w.mean()[0], w.mean()[1]);
    let s = vpp - vqp * vqp / vqq;
    if !(s > 0.0 && vqq > 0.0) {
        return Err(Error::numerical(
            "density_matrix",
            "degenerate Gaussian part",
        ));
    }
    let n = (2.0 * half_width / h).round() as usize + 1;
    let x0 = mq - half_width;
    let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * h).collect();
    let deg = w.poly().degree_in(1) as usize;
    // per midpoint q = x0 + k h / 2: polynomial in p, Gaussian weight, conditional mean
    let mids: Vec<(Vec<f64>, f64, f64)> = (0..2 * n - 1)
        .map(|k| {
            let q = x0 + 0.5 * k as f64 * h;
            let c = w.poly().restrict_to_line(1, &[q, 0.0]);
            let dq = q - mq;
            let weight = Real::exp(-0.5 * dq * dq / vqq) / (2.0 * PI * vqq).sqrt();
            (c, weight, mp + vqp / vqq * dq)
        })
        .collect();
    let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
    let mut m = vec![Complex64::new(0.0, 0.0); deg + 1];
    for i in 0..n {
        for j in 0..n {
            let (c, weight, cm) = &mids[i + j];
            let y = xs[i] - xs[j];
            let mu = Complex64::new(*cm, s * y);
            m[0] = Complex64::new(1.0, 0.0);
            if deg >= 1 {
                m[1] = mu;
            }
            for k in 2..=deg {
                m[k] = mu * m[k - 1] + m[k - 2] * ((k - 1) as f64 * s);
            }
            let sum: Complex64 = c.iter().zip(&m).map(|(ck, mk)| mk * *ck).sum();
            let phase = polar(Real::exp(-0.5 * s * y * y), cm * y);
            rho[i * n + j] = sum * phase * *weight;
        }
    }
    Ok(DensityMatrix { xs, h, rho })
}

/// Fidelity together with how much it was clipped into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fidelity {
    pub value: f64,
    pub clipped_by: f64,
}

fn check_normalized(w: &PolyGaussian, op: &'static str) -> Result<()> {
    let t = w.total()?;
    if (t - 1.0).abs() > 1e-6 {
        return Err(Error::contract(
            op,
            format!("state is not normalized (integral {t})"),
        ));
    }
    Ok(())
}

/// `F = ⟨ψ_t|ρ|ψ_t⟩`, with `ρ(x, x')` obtained in closed form from the Wigner
/// function and the double integral done by the trapezoid rule.
pub fn fidelity(w: &PolyGaussian, target: &TargetState) -> Result<Fidelity> {
    check_normalized(w, "fidelity")?;
    let psi = target.wavefunction()?;
    fidelity_with(w, &psi)
}

fn fidelity_with(w: &PolyGaussian, psi: &TargetWave) -> Result<Fidelity> {
    let dm = density_matrix(w, 10.0, 0.04)?;
    let vals: Vec<Complex64> = dm.xs.iter().map(|&x| psi.eval(x)).collect();
    let n = dm.xs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += dm.rho[i * n + j] * vals[j];
        }
        acc += vals[i].conj() * row;
    }
    let f = acc.re * dm.h * dm.h;
    let clipped = f.clamp(0.0, 1.0);
    Ok(Fidelity {
        value: clipped,
        clipped_by: f - clipped,
    })
}

/// `2π ∬ W_state W_target` on a grid; an independent check of [`fidelity`].
pub fn fidelity_wigner_overlap(
    w: &PolyGaussian,
    target: &TargetState,
    grid: &GridSpec,
) -> Result<f64> {
    check_normalized(w, "fidelity_wigner_overlap")?;
    let a = w.evaluate_grid(grid)?;
    let b = target.wavefunction()?.wigner_grid(grid)?;
    Ok(2.0
        * PI
        * a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x * y)
            .sum::<f64>()
        * grid.dx()
        * grid.dp())
}

/// `2π ∬ W_a W_b`, exact for two single-mode polynomial × Gaussian states.
/// Equals `Tr(ρ_a ρ_b)`, the fidelity when either state is pure.
pub fn state_overlap(a: &PolyGaussian, b: &PolyGaussian) -> Result<f64> {
    if a.axes() != [Axis::XM, Axis::PM] || b.axes() != a.axes() {
        return Err(Error::contract(
            "state_overlap",
            "both states must be over (X_M, P_M)",
        ));
    }
    check_normalized(a, "state_overlap")?;
    check_normalized(b, "state_overlap")?;
    let inv = |m: &crate::linalg::Matrix| {
        m.inverse()
            .map(|i| i.matrix)
            .ok_or_else(|| Error::numerical("state_overlap", "singular covariance"))
    };
    let (pa, pb) = (inv(a.cov())?, inv(b.cov())?);
    let cov = inv(&pa.add(&pb))?;
    let rhs: Vec<f64> = {
        let x = pa.mul_vec(a.mean());
        let y = pb.mul_vec(b.mean());
        x.iter().zip(&y).map(|(p, q)| p + q).collect()
    };
    let mean = cov.mul_vec(&rhs);
    let sum = a.cov().add(b.cov());
    let d = [a.mean()[0] - b.mean()[0], a.mean()[1] - b.mean()[1]];
    let sinv = inv(&sum)?;
    let q = d[0] * (sinv[(0, 0)] * d[0] + sinv[(0, 1)] * d[1])
        + d[1] * (sinv[(1, 0)] * d[0] + sinv[(1, 1)] * d[1]);
    let pref = Real::exp(-0.5 * q) / (2.0 * PI * sum.det().sqrt());
    let prod = PolyGaussian::from_parts(a.axes().to_vec(), a.poly().mul(b.poly()), mean, cov)?;
    Ok(2.0 * PI * pref * prod.total()?)
}

/// Target family searched by [`best_fidelity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetFamily {
    /// Squeezed cats with lobes on X (`Axis::XM`) or P (`Axis::PM`).
    Cat { axis: Axis, parity: i32 },
    /// Squeezed Fock states.
    Fock { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestFit {
    pub target: TargetState,
    /// `(⟨X⟩, ⟨P⟩)` of the state; the target is displaced onto it.
    pub displacement: (f64, f64),
    pub fidelity: f64,
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step[i];
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|s| s.0[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| centroid[k] + t * (worst[k] - centroid[k]))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(-1.0, &worst);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0, &worst);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(0.5, &worst);
            let fc = f(&xc);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (s.0[k] - best[k])).collect();
                    let v = f(&p);
                    *s = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0.clone(), simplex[0].1)
}

/// Highest fidelity over the amplitude and squeezing of a target family,
/// with the target displaced to the state's mean.
pub fn best_fidelity(w: &PolyGaussian, family: TargetFamily) -> Result<BestFit> {
    check_normalized(w, "best_fidelity")?;
    let x0 = w.moment(&[(Axis::XM, 1)])?;
    let p0 = w.moment(&[(Axis::PM, 1)])?;
    let dm = density_matrix(w, 10.0, 0.04)?;
    let n = dm.xs.len();
    let score = |t: &TargetState| -> f64 {
        let psi = match t.wavefunction() {
            Ok(p) => p,
            Err(_) => return 0.0,
        };
        let vals: Vec<Complex64> = dm
            .xs
            .iter()
            .map(|&x| psi.eval(x - x0) * polar(1.0, p0 * x))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += dm.rho[i * n + j] * vals[j];
            }
            acc += vals[i].conj() * row;
        }
        acc.re * dm.h * dm.h
    };
    let build = |p: &[f64]| -> TargetState {
        match family {
            TargetFamily::Cat { axis, parity } => {
                let a = p[0].abs();
                let alpha = if axis == Axis::PM {
                    Complex64::new(0.0, a)
                } else {
                    Complex64::new(a, 0.0)
                };
                TargetState::Cat {
                    alpha,
                    parity,
                    squeeze_db: p[1],
                }
            }
            TargetFamily::Fock { n } => TargetState::Fock {
                n,
                squeeze_db: p[0],
            },
        }
    };
    let (best, val) = match family {
        TargetFamily::Cat { .. } => {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for a0 in [1.0, 1.4, 1.8] {
                for s0 in [-3.0, 0.0, 3.0] {
                    let r = nelder_mead(|p| -score(&build(p)), &[a0, s0], &[0.2, 1.0], 200);
                    if best.as_ref().is_none_or(|b| r.1 < b.1) {
                        best = Some(r);
                    }
                }
            }
            best.unwrap()
        }
        TargetFamily::Fock { .. } => {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for s0 in [-3.0, 0.0, 3.0] {
                let r = nelder_mead(|p| -score(&build(p)), &[s0], &[1.0], 200);
                if best.as_ref().is_none_or(|b| r.1 < b.1) {
                    best = Some(r);
                }
            }
            best.unwrap()
        }
    };
    Ok(BestFit {
        target: build(&best),
        displacement: (x0, p0),
        fidelity: (-val).clamp(0.0, 1.0),
    })
}

/// Two-lobe structure of a single-axis marginal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lobes {
    pub left: f64,
    pub right: f64,
    /// Lobe variance from the curvature of the log density at the peaks.
    pub variance: f64,
}

impl Lobes {
    /// `|α|²` of a coherent-state pair at `±x*` with lobe variance `v`:
    /// `x*² / (4 v)`.
    pub fn alpha2(&self) -> f64 {
        let half = 0.5 * (self.right - self.left);
        half * half / (4.0 * self.variance)
    }
}

/// Finds the two dominant peaks of the marginal along `axis`.
pub fn lobes(w: &PolyGaussian, axis: Axis) -> Result<Option<Lobes>> {
    let m = w.marginal(&[axis])?;
    let c = m.mean()[0];
    let sd = m.cov()[(0, 0)].sqrt();
    let lo = c - 10.0 * sd.max(0.5);
    let hi = c + 10.0 * sd.max(0.5);
    let n = 4001;
    let h = (hi - lo) / (n - 1) as f64;
    let f: Vec<f64> = (0..n).map(|i| m.eval(&[lo + i as f64 * h])).collect();
    let fmax = f.iter().cloned().fold(0.0, f64::max);
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        if f[i] > f[i - 1] && f[i] >= f[i + 1] && f[i] > 1e-3 * fmax {
            peaks.push((lo + i as f64 * h, f[i]));
        }
    }
    if peaks.len() < 2 {
        return Ok(None);
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut two = [peaks[0].0, peaks[1].0];
    two.sort_by(f64::total_cmp);
    let logf = |x: f64| Real::ln(m.eval(&[x]));
    let refine = |x0: f64| -> (f64, f64) {
        // Newton steps on the log density
        let mut x = x0;
        let d = 1e-4;
        for _ in 0..30 {
            let g = (logf(x + d) - logf(x - d)) / (2.0 * d);
            let c2 = (logf(x + d) - 2.0 * logf(x) + logf(x - d)) / (d * d);
            if !(c2 < 0.0) {
                break;
            }
            let step = -g / c2;
            x += step.clamp(-h, h);
            if step.abs() < 1e-12 {
                break;
            }
        }
        let c2 = (logf(x + d) - 2.0 * logf(x) + logf(x - d)) / (d * d);
        (x, -1.0 / c2)
    };
    let (l, vl) = refine(two[0]);
    let (r, vr) = refine(two[1]);
    if !(vl > 0.0 && vr > 0.0) {
        return Ok(None);
    }
    Ok(Some(Lobes {
        left: l,
        right: r,
        variance: 0.5 * (vl + vr),
    }))
}

/// `|α|²` along `axis`, or `None` when there is no two-lobe structure.
pub fn cat_size(w: &PolyGaussian, axis: Axis) -> Result<Option<f64>> {
    Ok(lobes(w, axis)?.map(|l| l.alpha2()))
}

/// The quadrature with the larger variance, along which cat lobes separate.
pub fn cat_axis(w: &PolyGaussian) -> Result<Axis> {
    let (vx, vp) = variances(w)?;
    Ok(if vp > vx { Axis::PM } else { Axis::XM })
}

fn variances(w: &PolyGaussian) -> Result<(f64, f64)> {
    let mx = w.moment(&[(Axis::XM, 1)])?;
    let mp = w.moment(&[(Axis::PM, 1)])?;
    Ok((
        w.moment(&[(Axis::XM, 2)])? - mx * mx,
        w.moment(&[(Axis::PM, 2)])? - mp * mp,
    ))
}

fn min_quadrature_variance(w: &PolyGaussian) -> Result<f64> {
    let mx = w.moment(&[(Axis::XM, 1)])?;
    let mp = w.moment(&[(Axis::PM, 1)])?;
    let vx = w.moment(&[(Axis::XM, 2)])? - mx * mx;
    let vp = w.moment(&[(Axis::PM, 2)])? - mp * mp;
    let cxp = w.moment(&[(Axis::XM, 1), (Axis::PM, 1)])? - mx * mp;
    let tr = vx + vp;
    let det = vx * vp - cxp * cxp;
    Ok(0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqueezeMethod {
    /// `10 log10(2 min Var)`.
    MinVariance,
    /// `10 log10(min Var / ((2n+1)/2))`, relative to the unsqueezed Fock state.
    FockVariance(usize),
    /// `10 log10(2 v)` with `v` the lobe variance along `axis`.
    LobeVariance(Axis),
}

pub fn squeezing_estimate(w: &PolyGaussian, method: SqueezeMethod) -> Result<Option<f64>> {
    check_normalized(w, "squeezing_estimate")?;
    Ok(match method {
        SqueezeMethod::MinVariance => Some(10.0 * Real::log10(2.0 * min_quadrature_variance(w)?)),
        SqueezeMethod::FockVariance(n) => {
            Some(10.0 * Real::log10(min_quadrature_variance(w)? / ((2 * n + 1) as f64 / 2.0)))
        }
        SqueezeMethod::LobeVariance(axis) => {
            lobes(w, axis)?.map(|l| 10.0 * Real::log10(2.0 * l.variance))
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    pub fidelity: Option<f64>,
    pub delta: f64,
    pub alpha2: Option<f64>,
    pub squeeze_db: Option<f64>,
    pub squeeze_method: Option<SqueezeMethod>,
    pub parity: f64,
}

impl StateMetrics {
    /// Negativity, parity, and the cat size along the dominant axis; fidelity
    /// and squeezing when a target or method is given.
    pub fn evaluate(
        w: &PolyGaussian,
        target: Option<&TargetState>,
        squeeze: Option<SqueezeMethod>,
    ) -> Result<Self> {
        check_normalized(w, "StateMetrics")?;
        let axis = cat_axis(w)?;
        Ok(StateMetrics {
            fidelity: match target {
                Some(t) => Some(fidelity(w, t)?.value),
                None => None,
            },
            delta: w.wigner_negativity()?.delta,
            alpha2: cat_size(w, axis)?,
            squeeze_db: match squeeze {
                Some(m) => squeezing_estimate(w, m)?,
                None => None,
            },
            squeeze_method: squeeze,
            parity: w.parity()?,
        })
    }
}

/// Single-mode polynomial × Gaussian Wigner function of a pure target that has
/// one: Fock states (any squeezing).
pub fn fock_wigner(n: usize, squeeze_db: f64) -> Result<PolyGaussian> {
    use crate::linalg::Matrix;
    use crate::poly::{Affine, MultiPoly};
    // W_n = (-1)^n/π L_n(2(x²+p²)) e^{-(x²+p²)}
    let mut lag = vec![0.0; n + 1];
    for (k, c) in lag.iter_mut().enumerate() {
        let binom = (0..k).fold(1.0, |a, j| a * (n - j) as f64 / (j + 1) as f64);
        let fact = (1..=k).fold(1.0, |a, j| a * j as f64);
        *c = if k % 2 == 0 { 1.0 } else { -1.0 } * binom / fact;
    }
    let r2 = MultiPoly::var(2, 0)
        .mul(&MultiPoly::var(2, 0))
        .add(&MultiPoly::var(2, 1).mul(&MultiPoly::var(2, 1)))
        .scale(2.0);
    let mut poly = MultiPoly::zero(2);
    let mut pw = MultiPoly::one(2);
    for c in &lag {
        poly = poly.add(&pw.scale(*c));
        pw = pw.mul(&r2);
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let s = from_db(squeeze_db).sqrt();
    let forms = [
        Affine {
            constant: 0.0,
            coeffs: vec![1.0 / s, 0.0],
        },
        Affine {
            constant: 0.0,
            coeffs: vec![0.0, s],
        },
    ];
    let poly = poly.scale(sign).substitute(&forms, 2);
    let cov = Matrix::diag(&[0.5 * s * s, 0.5 / (s * s)]);
    PolyGaussian::from_parts(alloc::vec![Axis::XM, Axis::PM], poly, vec![0.0; 2], cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(a: f64, parity: i32, db: f64) -> TargetState {
        TargetState::Cat {
            alpha: Complex64::new(a, 0.0),
            parity,
            squeeze_db: db,
        }
    }

    #[test]
    fn best_fit_ignores_outcome_displacement() {
        use crate::gaussian::SqueezeSpec;
        use crate::phase_space::Measurement;
        use crate::pulse::{covariance_after_pulse, PulseSpec, SystemParams};
        use crate::synthesis::{eps_pipeline, solve_gain, EpsStage, PipelineSpec};
        let p = SystemParams::with_cooperativity(
            1.0,
            7.0,
            f64::INFINITY,
            0.0,
            SqueezeSpec::from_db(-6.0).unwrap(),
        )
        .unwrap();
        let v = covariance_after_pulse(&p, PulseSpec::Reflectivity(0.9)).unwrap();
        let g = solve_gain(&v.to_sigma().unwrap(), 1.0).unwrap();
        let run = |zeta: f64| {
            let mut m = Measurement::new(0.0, zeta, 1.0, 1.0).unwrap();
            m.epsilon = 0.0;
            let spec = PipelineSpec {
                measurement: m,
                ..PipelineSpec::ideal(vec![EpsStage::new(g, 0.0, 2).unwrap()])
            };
            eps_pipeline(&v, &spec).unwrap().state
        };
        let fam = TargetFamily::Cat {
            axis: Axis::PM,
            parity: 1,
        };
        let a = best_fidelity(&run(0.0), fam).unwrap();
        let b = best_fidelity(&run(1.0), fam).unwrap();
        assert!(b.displacement.0.abs() > 0.1);
        assert!(
            (a.fidelity - b.fidelity).abs() < 1e-6,
            "{} vs {}",
            a.fidelity,
            b.fidelity
        );
    }

    #[test]
    fn targets_are_normalized() {
        for t in [
            cat(2f64.sqrt(), 1, 0.0),
            cat(0.3, -1, -3.0),
            TargetState::Fock {
                n: 3,
                squeeze_db: 2.0,
            },
            TargetState::FourCat {
                alpha0: 1.6,
                squeeze_db: 0.0,
            },
            TargetState::Cat {
                alpha: Complex64::new(0.0, 0.0),
                parity: 1,
                squeeze_db: 0.0,
            },
        ] {
            let psi = t.wavefunction().unwrap();
            assert!((psi.overlap(&psi).re - 1.0).abs() < 1e-10);
        }
        assert!(cat(0.0, -1, 0.0).wavefunction().is_err());
        // analytic cat normalization [2(1 + e^{-2|α|²})]^{-1/2}
        let a = 1.1f64;
        let psi = cat(a, 1, 0.0).wavefunction().unwrap();
        let n = 1.0 / (2.0 * (1.0 + Real::exp(-2.0 * a * a))).sqrt();
        assert!(
            (psi.eval(0.0).re - n * 2.0 * Real::powf(PI, -0.25) * Real::exp(-a * a)).abs() < 1e-12
        );
    }

    #[test]
    fn fock_wigner_values() {
        let w1 = fock_wigner(1, 0.0).unwrap();
        assert!((w1.eval(&[0.0, 0.0]) + 1.0 / PI).abs() < 1e-15);
        let psi = TargetState::Fock {
            n: 1,
            squeeze_db: 0.0,
        }
        .wavefunction()
        .unwrap();
        assert!((psi.wigner(0.0, 0.0) + 1.0 / PI).abs() < 1e-10);
        for n in 0..4 {
            let w = fock_wigner(n, -2.0).unwrap();
            assert!((w.total().unwrap() - 1.0).abs() < 1e-12);
            assert!((w.parity().unwrap() - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn self_fidelity_and_symmetry() {
        for (n, db) in [(1, 0.0), (2, -3.0), (3, 2.0)] {
            let w = fock_wigner(n, db).unwrap();
            let f = fidelity(&w, &TargetState::Fock { n, squeeze_db: db }).unwrap();
            assert!((f.value - 1.0).abs() < 1e-9, "{f:?}");
        }
        // F(A as target, B) = F(B as target, A) for pure Fock states
        let a = fock_wigner(2, -2.0).unwrap();
        let b = fock_wigner(2, 1.0).unwrap();
        let fab = fidelity(
            &a,
            &TargetState::Fock {
                n: 2,
                squeeze_db: 1.0,
            },
        )
        .unwrap()
        .value;
        let fba = fidelity(
            &b,
            &TargetState::Fock {
                n: 2,
                squeeze_db: -2.0,
            },
        )
        .unwrap()
        .value;
        assert!((fab - fba).abs() < 1e-9);
        let ov = TargetState::Fock {
            n: 2,
            squeeze_db: -2.0,
        }
        .wavefunction()
        .unwrap()
        .overlap(
            &TargetState::Fock {
                n: 2,
                squeeze_db: 1.0,
            }
            .wavefunction()
            .unwrap(),
        )
        .norm_sqr();
        assert!((fab - ov).abs() < 1e-9);
        let wo = fidelity_wigner_overlap(
            &a,
            &TargetState::Fock {
                n: 2,
                squeeze_db: 1.0,
            },
            &GridSpec::square(-7.0, 7.0, 141),
        )
        .unwrap();
        assert!((wo - fab).abs() < 1e-4);
        assert!((state_overlap(&a, &b).unwrap() - fab).abs() < 1e-9);
        assert!(fidelity(
            &a.scale(2.0),
            &TargetState::Fock {
                n: 2,
                squeeze_db: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn cat_size_of_ideal_cats() {
        // a two-lobe mixture with known lobes: even cat Wigner function is not a
        // single polynomial × Gaussian, so use the Fock-n marginal for structure
        // and the coherent-pair formula on synthetic Gaussian lobes
        let l = Lobes {
            left: -2.0,
            right: 2.0,
            variance: 0.5,
        };
        assert!((l.alpha2() - 2.0).abs() < 1e-15);
        // x^n e^{-x²/2}-type state: Fock-2 marginal is three-peaked; the two
        // outer lobes dominate
        let w = fock_wigner(2, 0.0).unwrap();
        assert!(cat_size(&w, Axis::XM).unwrap().is_some());
        let vac = fock_wigner(0, 0.0).unwrap();
        assert!(cat_size(&vac, Axis::XM).unwrap().is_none());
        assert!(
            (squeezing_estimate(&vac, SqueezeMethod::MinVariance)
                .unwrap()
                .unwrap())
            .abs()
                < 1e-12
        );
        let sq = fock_wigner(1, -3.0).unwrap();
        assert!(
            (squeezing_estimate(&sq, SqueezeMethod::FockVariance(1))
                .unwrap()
                .unwrap()
                + 3.0)
                .abs()
                < 1e-10
        );
    }

    #[test]
    fn best_fit_recovers_squeezing() {
        let w = fock_wigner(2, -1.5).unwrap();
        let b = best_fidelity(&w, TargetFamily::Fock { n: 2 }).unwrap();
        assert!((b.fidelity - 1.0).abs() < 1e-8);
        match b.target {
            TargetState::Fock { squeeze_db, .. } => assert!((squeeze_db + 1.5).abs() < 1e-3),
            _ => unreachable!(),
        }
    }
}

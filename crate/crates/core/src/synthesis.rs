//! Engineered photon subtraction: amplifier, photon subtraction and homodyne
//! conditioning of the optical mode, plus the closed-form routes used to
//! cross-check the phase-space pipeline.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian::{Amplifier, CovMatrix, SigmaMatrix};
use crate::linalg::Matrix;
use crate::phase_space::{Axis, Measurement, PolyGaussian};
use crate::poly::{Affine, MultiPoly, MAX_VARS};
use crate::quad::gauss_hermite;
use crate::real::Real;

/// Amplifier followed by `photons` subtractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsStage {
    pub amplifier: Amplifier,
    pub photons: usize,
}

impl EpsStage {
    pub fn new(gain: f64, noise: f64, photons: usize) -> Result<Self> {
        Ok(EpsStage {
            amplifier: Amplifier::new(gain, noise)?,
            photons,
        })
    }

    pub fn from_db(gain_db: f64, noise: f64, photons: usize) -> Result<Self> {
        Ok(EpsStage {
            amplifier: Amplifier::from_db(gain_db, noise)?,
            photons,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSpec {
    pub stages: Vec<EpsStage>,
    pub measurement: Measurement,
    /// Transmission efficiency between the cavity and the remote site.
    pub eta: f64,
    /// Probability that a herald click is a genuine subtraction.
    pub nu: f64,
}

impl PipelineSpec {
    pub fn ideal(stages: Vec<EpsStage>) -> Self {
        PipelineSpec {
            stages,
            measurement: Measurement::ideal(),
            eta: 1.0,
            nu: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain(
                "PipelineSpec",
                format!("eta must lie in (0, 1], got {}", self.eta),
            ));
        }
        if !(self.nu >= 0.0 && self.nu <= 1.0) {
            return Err(Error::domain(
                "PipelineSpec",
                format!("nu must lie in [0, 1], got {}", self.nu),
            ));
        }
        let m = &self.measurement;
        if !(m.epsilon >= 0.0) || !(m.efficiency > 0.0 && m.efficiency <= 1.0) {
            return Err(Error::domain(
                "PipelineSpec",
                format!("invalid measurement {m:?}"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    /// Normalized mechanical Wigner function over `(X_M, P_M)`.
    pub state: PolyGaussian,
    /// Outcome probability density of the homodyne result, given the heralds.
    pub outcome_density: f64,
    /// Mean photon number seen by each subtraction, in order.
    pub subtraction_weights: Vec<f64>,
}

fn run_stages(
    start: &PolyGaussian,
    stages: &[EpsStage],
    skip_one_at: Option<usize>,
) -> Result<(PolyGaussian, Vec<f64>)> {
    let mut w = start.clone();
    let mut weights = Vec::new();
    for (s, stage) in stages.iter().enumerate() {
        w = w.amplify(stage.amplifier)?;
        let n = if skip_one_at == Some(s) {
            stage.photons - 1
        } else {
            stage.photons
        };
        for _ in 0..n {
            let next = w.subtract_photon()?;
            let weight = next.total()?;
            if next.poly().is_zero() || !(weight > 1e-12) {
                return Err(Error::ZeroWeight {
                    stage: s + 1,
                    detail: format!("photon subtraction has weight {weight:.3e}"),
                });
            }
            weights.push(weight);
            w = next.scale(1.0 / weight);
        }
    }
    Ok((w, weights))
}

/// Transmission loss, then every stage in order, then herald mixing, then the
/// homodyne measurement. An `epsilon` of zero selects the sharp slice.
pub fn eps_pipeline(v: &CovMatrix, spec: &PipelineSpec) -> Result<PipelineOutput> {
    spec.validate()?;
    let rep = v.check_physical();
    if !rep.physical {
        return Err(Error::Unphysical {
            op: "eps_pipeline",
            min_symplectic: rep.min_symplectic,
        });
    }
    let mut w = PolyGaussian::gaussian_wigner(v);
    if spec.eta < 1.0 {
        w = w.optical_loss(spec.eta)?;
    }
    let (heralded, weights) = run_stages(&w, &spec.stages, None)?;
    let mixed = if spec.nu < 1.0 {
        let mut false_branches = Vec::new();
        for (s, st) in spec.stages.iter().enumerate() {
            if st.photons > 0 {
                false_branches.push(run_stages(&w, &spec.stages, Some(s))?.0);
            }
        }
        if false_branches.is_empty() {
            heralded
        } else {
            let k = false_branches.len() as f64;
            let mut avg = false_branches[0].scale(1.0 / k);
            for b in &false_branches[1..] {
                avg = avg.add_same_gaussian(&b.scale(1.0 / k))?;
            }
            dark_count_mix(&heralded, &avg, spec.nu)?
        }
    } else {
        heralded
    };
    let projected = if spec.measurement.epsilon == 0.0 {
        mixed.project_slice(&spec.measurement)?
    } else {
        mixed.project(&spec.measurement)?
    };
    let (state, outcome_density) = projected.normalize().map_err(|_| Error::ZeroWeight {
        stage: spec.stages.len() + 1,
        detail: "homodyne outcome has zero probability".into(),
    })?;
    Ok(PipelineOutput {
        state,
        outcome_density,
        subtraction_weights: weights,
    })
}

/// `ν W_heralded + (1-ν) W_unheralded` for normalized branches.
pub fn dark_count_mix(
    heralded: &PolyGaussian,
    unheralded: &PolyGaussian,
    nu: f64,
) -> Result<PolyGaussian> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::domain(
            "dark_count_mix",
            format!("nu must lie in [0, 1], got {nu}"),
        ));
    }
    if heralded.axes() != unheralded.axes() {
        return Err(Error::contract(
            "dark_count_mix",
            "branches are over different variables",
        ));
    }
    if nu == 1.0 {
        return Ok(heralded.clone());
    }
    if nu == 0.0 {
        return Ok(unheralded.clone());
    }
    heralded
        .scale(nu)
        .add_same_gaussian(&unheralded.scale(1.0 - nu))
}

/// `g_A = σ33 - ξ σ13² / σ11` (power gain).
pub fn solve_gain(sigma: &SigmaMatrix, xi: f64) -> Result<f64> {
    let s13 = sigma.s(1, 3);
    if s13 == 0.0 {
        return Err(Error::domain(
            "solve_gain",
            "no X-correlation (sigma13 = 0): xi undefined",
        ));
    }
    let g = sigma.s(3, 3) - xi * s13 * s13 / sigma.s(1, 1);
    if !(g > 0.0) {
        return Err(Error::domain(
            "solve_gain",
            format!(
                "xi = {xi} needs gain {g:.6} <= 0 (sigma11 = {:.6}, sigma13 = {:.6}, sigma33 = {:.6})",
                sigma.s(1, 1),
                s13,
                sigma.s(3, 3)
            ),
        ));
    }
    Ok(g)
}

pub fn xi_from_gain(sigma: &SigmaMatrix, gain: f64) -> Result<f64> {
    let s13 = sigma.s(1, 3);
    if s13 == 0.0 {
        return Err(Error::domain(
            "xi_from_gain",
            "no X-correlation (sigma13 = 0): xi undefined",
        ));
    }
    Ok((sigma.s(3, 3) - gain) / (s13 * s13 / sigma.s(1, 1)))
}

/// Gains producing the P-direction cat (ξ=1), the Fock state (ξ=1/2) and the
/// X-direction cat (ξ=0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetGains {
    pub g_p: f64,
    pub g_f: f64,
    pub g_x: f64,
}

pub fn target_gains(sigma: &SigmaMatrix) -> Result<TargetGains> {
    Ok(TargetGains {
        g_p: solve_gain(sigma, 1.0)?,
        g_f: solve_gain(sigma, 0.5)?,
        g_x: solve_gain(sigma, 0.0)?,
    })
}

/// A real wave function `ψ(x) = N p(x) exp(-s (x - d)² / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    /// Polynomial coefficients in ascending powers of `x`.
    pub coeffs: Vec<f64>,
    pub center: f64,
    /// Inverse Gaussian variance `s`.
    pub stiffness: f64,
    pub norm: f64,
}

impl WaveFunction {
    pub fn new(coeffs: Vec<f64>, center: f64, stiffness: f64) -> Result<Self> {
        if !(stiffness > 0.0) {
            return Err(Error::domain(
                "WaveFunction",
                format!("stiffness must be > 0, got {stiffness}"),
            ));
        }
        let mut wf = WaveFunction {
            coeffs,
            center,
            stiffness,
            norm: 1.0,
        };
        let n2 = wf.integrate(|x| Real::powi(wf.eval_unnormalized(x), 2));
        if !(n2 > 0.0) {
            return Err(Error::ZeroWeight {
                stage: 0,
                detail: "wave function vanishes identically".into(),
            });
        }
        wf.norm = 1.0 / n2.sqrt();
        Ok(wf)
    }

    fn eval_unnormalized(&self, x: f64) -> f64 {
        let p = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let dx = x - self.center;
        p * Real::exp(-0.5 * self.stiffness * dx * dx)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.norm * self.eval_unnormalized(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let p = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let dp = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c);
        let dx = x - self.center;
        self.norm * (dp - self.stiffness * dx * p) * Real::exp(-0.5 * self.stiffness * dx * dx)
    }

    /// Exact for polynomial × `exp(-s (x-d)²)` integrands up to high degree.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let (t, w) = gauss_hermite(48);
        let sc = 1.0 / self.stiffness.sqrt();
        t.iter()
            .zip(&w)
            .map(|(&t, &w)| w * Real::exp(t * t) * f(self.center + sc * t) * sc)
            .sum()
    }

    /// `⟨m†m⟩`.
    pub fn mean_phonon_number(&self) -> f64 {
        let x2 = self.integrate(|x| x * x * Real::powi(self.eval(x), 2));
        let p2 = self.integrate(|x| Real::powi(self.derivative(x), 2));
        0.5 * (x2 + p2 - 1.0)
    }

    pub fn overlap(&self, other: &WaveFunction) -> f64 {
        self.integrate(|x| self.eval(x) * other.eval(x))
    }

    /// Returns `true` when `ψ(-x) = (-1)^n ψ(x)` holds with `n` even.
    pub fn parity(&self) -> Option<i32> {
        let xs = [0.3, 0.7, 1.1, 1.9];
        let even = xs
            .iter()
            .all(|&x| (self.eval(x) - self.eval(-x)).abs() < 1e-10);
        let odd = xs
            .iter()
            .all(|&x| (self.eval(x) + self.eval(-x)).abs() < 1e-10);
        match (even, odd) {
            (true, false) => Some(1),
            (false, true) => Some(-1),
            _ => None,
        }
    }
}

/// X-wave function after the EPS for a pure output state (γ = 0), from the
/// closed-form polynomial in `ξ`. `zeta ≠ 0` gives the displaced form, exact
/// for `ξ = 1`.
pub fn wavefunction_xm(
    sigma: &SigmaMatrix,
    gain: f64,
    n: usize,
    zeta: f64,
) -> Result<WaveFunction> {
    let xi = xi_from_gain(sigma, gain)?;
    let s11 = sigma.s(1, 1);
    let d = -zeta * sigma.s(1, 3) / (gain.sqrt() * s11);
    // Σ_k (-1)^k n! 2^{n-2k} / (k!(n-2k)!) (x/√(2/σ11))^{n-2k} ξ^k, shifted by d
    let mut base = vec![0.0; n + 1];
    let scale = (s11 / 2.0).sqrt();
    let mut k = 0;
    while 2 * k <= n {
        let m = n - 2 * k;
        let c = if k % 2 == 0 { 1.0 } else { -1.0 } * factorial(n) / (factorial(k) * factorial(m))
            * Real::powi(2f64, m as i32)
            * Real::powi(scale, m as i32)
            * Real::powi(xi, k as i32);
        base[m] += c;
        k += 1;
    }
    let coeffs = shift_poly(&base, d);
    WaveFunction::new(coeffs, d, s11)
}

/// Coefficients of `p(x - d)` from those of `p(x)`.
fn shift_poly(c: &[f64], d: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            out[j] += ck * binom * Real::powi(-d, (k - j) as i32);
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// X-wave function for any sequence of stages on a pure output state,
/// evaluated by applying `X_C + ∂_{X_C}` and the amplifier rescaling to
/// `ψ(X_M, X_C)` and setting `X_C = ζ`.
pub fn cascade_wavefunction(
    sigma: &SigmaMatrix,
    stages: &[EpsStage],
    zeta: f64,
) -> Result<WaveFunction> {
    let s11 = sigma.s(1, 1);
    let mut a = sigma.s(3, 3);
    let mut b = sigma.s(1, 3);
    let mut p = MultiPoly::one(2);
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);
    for st in stages {
        if st.amplifier.noise != 0.0 {
            return Err(Error::unsupported(
                "cascade_wavefunction",
                "noisy amplifier has no pure-state wave function",
            ));
        }
        let g = st.amplifier.gain;
        let forms = [
            Affine::var(2, 0),
            Affine {
                constant: 0.0,
                coeffs: vec![0.0, 1.0 / g.sqrt()],
            },
        ];
        p = p.substitute(&forms, 2);
        a /= g;
        b /= g.sqrt();
        for _ in 0..st.photons {
            let lin = y.scale(1.0 - a).sub(&x.scale(b));
            p = lin.mul(&p).add(&p.deriv(1));
        }
    }
    let mut coeffs = vec![0.0; p.degree_in(0) as usize + 1];
    for (e, c) in p.terms() {
        coeffs[e[0] as usize] += c * Real::powi(zeta, e[1] as i32);
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroWeight {
            stage: stages.len(),
            detail: "wave function vanishes".into(),
        });
    }
    WaveFunction::new(coeffs, -b * zeta / s11, s11)
}

/// Phonon number per subtracted photon for the `σ11 = 1` wave function.
pub fn conversion_rate_gamma(n: usize, xi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("conversion_rate_gamma", "n must be >= 1"));
    }
    // σ11 = 1, σ13 = 1 and σ33 = 1 + ξ place ξ at gain 1
    let s = SigmaMatrix::new(Matrix::from_rows([
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 1.0 + xi, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))?;
    let wf = wavefunction_xm(&s, 1.0, n, 0.0)?;
    Ok(wf.mean_phonon_number() / n as f64)
}

/// Second-stage parameter keeping the four-component cat symmetric.
pub fn four_cat_conditions(xi1: f64) -> f64 {
    3.0 - 5.0 * xi1
}

/// Gains `(g1, g2)` of two cascaded stages for `(ξ1, ξ2)`, with
/// `ξ2 = (σ33 - g1 g2)/(σ13²/σ11)`.
pub fn four_cat_gains(sigma: &SigmaMatrix, xi1: f64, xi2: f64) -> Result<(f64, f64)> {
    let g1 = solve_gain(sigma, xi1)?;
    let g12 = solve_gain(sigma, xi2)?;
    Ok((g1, g12 / g1))
}

pub fn four_cat_stages(sigma: &SigmaMatrix, xi1: f64) -> Result<Vec<EpsStage>> {
    let (g1, g2) = four_cat_gains(sigma, xi1, four_cat_conditions(xi1))?;
    Ok(vec![EpsStage::new(g1, 0.0, 2)?, EpsStage::new(g2, 0.0, 2)?])
}

/// `ψ(X_M) ∝ [(x/s)⁴ - (5ξ1+ξ2)(x/s)² + 2ξ1² + ξ1ξ2] e^{-x²/2s²}`, `s² = 1/σ11`.
pub fn four_cat_wavefunction(sigma11: f64, xi1: f64, xi2: f64) -> Result<WaveFunction> {
    let s2 = 1.0 / sigma11;
    let coeffs = vec![
        2.0 * xi1 * xi1 + xi1 * xi2,
        0.0,
        -(5.0 * xi1 + xi2) / s2,
        0.0,
        1.0 / (s2 * s2),
    ];
    WaveFunction::new(coeffs, 0.0, sigma11)
}

/// Runs the two cascaded stages selected by `xi1`.
pub fn four_cat_pipeline(
    v: &CovMatrix,
    xi1: f64,
    measurement: Measurement,
) -> Result<PipelineOutput> {
    let sigma = v.to_sigma()?;
    let stages = four_cat_stages(&sigma, xi1)?;
    eps_pipeline(
        v,
        &PipelineSpec {
            stages,
            measurement,
            eta: 1.0,
            nu: 1.0,
        },
    )
}

/// Closed-form six-parameter Wigner function of the two-photon EPS output,
/// with `sigma` taken after the amplifier and transmission loss. `epsilon`
/// is the standard deviation of the measurement window.
pub fn imperfect_wigner_closed_form(
    sigma: &SigmaMatrix,
    epsilon: f64,
    mu: f64,
) -> Result<PolyGaussian> {
    if !(epsilon >= 0.0) || !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(
            "imperfect_wigner_closed_form",
            format!("bad epsilon {epsilon} or mu {mu}"),
        ));
    }
    let s = |i, j| sigma.s(i, j);
    // the six-parameter form uses a window of variance ε'²/2
    let e2 = 2.0 * epsilon * epsilon;
    let den_a = mu * (s(3, 3) - 1.0) - (1.0 + e2) * s(3, 3);
    let den_c = mu + s(3, 3) - mu * s(3, 3) + e2 * s(3, 3);
    if den_a.abs() < 1e-14 || den_c.abs() < 1e-14 || s(4, 4).abs() < 1e-14 {
        return Err(Error::domain(
            "imperfect_wigner_closed_form",
            format!(
                "vanishing denominator (den_a = {den_a:e}, den_c = {den_c:e}, sigma44 = {:e})",
                s(4, 4)
            ),
        ));
    }
    let a = s(1, 1) + (1.0 - mu + e2) * s(1, 3) * s(1, 3) / den_a;
    let b = s(2, 2) - s(2, 4) * s(2, 4) / s(4, 4);
    let c = (1.0 + e2) * s(1, 3) / den_c;
    let d = s(2, 4) / s(4, 4);
    let e = (1.0 + e2) * (s(3, 3) - 1.0) / den_c;
    let f = (s(4, 4) - 1.0) / s(4, 4);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(
            "imperfect_wigner_closed_form",
            format!("non-decaying Gaussian (a = {a}, b = {b})"),
        ));
    }
    let term = |ex: u16, ep: u16, coef: f64| {
        let mut k = [0; MAX_VARS];
        k[0] = ex;
        k[1] = ep;
        let mut p = MultiPoly::zero(2);
        p.add_term(k, coef);
        p
    };
    let fp = term(2, 0, c * c).add(&term(0, 2, d * d));
    let fm = term(2, 0, c * c).add(&term(0, 2, -d * d));
    let lambda = e * e + f * f + 6.0 * e * f;
    let inner = fp
        .scale(2.0)
        .add(&MultiPoly::constant(2, -2.0 * e - 2.0 * f));
    let poly = inner
        .mul(&inner)
        .sub(&fm.scale(4.0 * (e - f)))
        .add(&MultiPoly::constant(2, -lambda));
    let cov = Matrix::diag(&[0.5 / a, 0.5 / b]);
    let w = PolyGaussian::from_parts(vec![Axis::XM, Axis::PM], poly, vec![0.0; 2], cov)?;
    Ok(w.normalize()?.0)
}

/// Steady-state gain of the parametric amplifier at pump ratio `x`.
pub fn opa_gain(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(
            "opa_gain",
            format!("pump ratio must be >= 0, got {x}"),
        ));
    }
    if x >= 1.0 {
        return Err(Error::numerical(
            "opa_gain",
            format!("parametric instability: pump ratio {x} >= 1"),
        ));
    }
    Ok(Real::powi(1.0 + x, 2) / Real::powi(1.0 - x, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{to_db, SqueezeSpec};
    use crate::phase_space::GridSpec;
    use crate::pulse::{covariance_after_pulse, PulseSpec, SystemParams};

    fn state(r: f64, db: f64, gamma: f64, n_m: f64) -> CovMatrix {
        let p = SystemParams::from_mhz(3.0, 7.0, gamma, n_m, SqueezeSpec::from_db(db).unwrap())
            .unwrap();
        covariance_after_pulse(&p, PulseSpec::Reflectivity(r)).unwrap()
    }

    #[test]
    fn gain_round_trip() {
        let s = state(0.9, -6.0, 1.6, 0.0).to_sigma().unwrap();
        for xi in [-1.0, 0.0, 0.25, 0.5, 1.0, 2.0] {
            let g = solve_gain(&s, xi).unwrap();
            assert!((xi_from_gain(&s, g).unwrap() - xi).abs() < 1e-12);
        }
        let g = target_gains(&s).unwrap();
        assert!(g.g_x > g.g_f && g.g_f > g.g_p);
        let prod = SigmaMatrix::new(Matrix::identity(4)).unwrap();
        assert!(solve_gain(&prod, 0.5).is_err());
    }

    #[test]
    fn opa() {
        assert_eq!(opa_gain(0.0).unwrap(), 1.0);
        assert!((to_db(opa_gain(1.0 / 3.0).unwrap()) - 6.0206).abs() < 1e-4);
        assert!(opa_gain(1.0).is_err());
    }

    #[test]
    fn conversion_rate() {
        for n in 1..=4 {
            assert!((conversion_rate_gamma(n, 0.5).unwrap() - 1.0).abs() < 1e-12);
            for xi in [-1.0, -0.3, 0.0, 0.2, 0.9, 1.7, 2.0] {
                let a = conversion_rate_gamma(n, xi).unwrap();
                let b = conversion_rate_gamma(n, 1.0 - xi).unwrap();
                assert!((a - b).abs() < 1e-10, "n={n} xi={xi}");
            }
        }
        for xi in [-1.0, 0.0, 0.7] {
            assert!((conversion_rate_gamma(1, xi).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((conversion_rate_gamma(2, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-13);
        assert!(conversion_rate_gamma(0, 0.5).is_err());
    }

    #[test]
    fn closed_form_wavefunctions_agree() {
        let s = state(0.5, -6.0, 0.0, 0.0).to_sigma().unwrap();
        for n in 1..=3 {
            for xi in [0.0, 0.5, 1.0, 1.7] {
                let g = solve_gain(&s, xi).unwrap();
                let a = wavefunction_xm(&s, g, n, 0.0).unwrap();
                let b =
                    cascade_wavefunction(&s, &[EpsStage::new(g, 0.0, n).unwrap()], 0.0).unwrap();
                assert!((a.overlap(&b).abs() - 1.0).abs() < 1e-12);
            }
        }
        // displaced form is exact at ξ = 1
        let g = solve_gain(&s, 1.0).unwrap();
        let a = wavefunction_xm(&s, g, 2, 1.0).unwrap();
        let b = cascade_wavefunction(&s, &[EpsStage::new(g, 0.0, 2).unwrap()], 1.0).unwrap();
        assert!((a.overlap(&b).abs() - 1.0).abs() < 1e-12);
        assert!((a.center + s.s(1, 3) / (g.sqrt() * s.s(1, 1))).abs() < 1e-15);
        assert_eq!(wavefunction_xm(&s, g, 2, 0.0).unwrap().center, 0.0);
    }

    #[test]
    fn fock_limit() {
        let s = SigmaMatrix::new(Matrix::from_rows([
            [1.0, 0.0, 0.8, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.8, 0.0, 2.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]))
        .unwrap();
        let g = solve_gain(&s, 0.5).unwrap();
        let wf = wavefunction_xm(&s, g, 2, 0.0).unwrap();
        // Fock-2: (2x² - 1) e^{-x²/2} / √(2√π)
        let fock = WaveFunction::new(vec![-1.0, 0.0, 2.0], 0.0, 1.0).unwrap();
        assert!((wf.overlap(&fock) - 1.0).abs() < 1e-13);
        let x0 = wavefunction_xm(&s, solve_gain(&s, 0.0).unwrap(), 2, 0.0).unwrap();
        // x² e^{-x²/2}: peaks of |ψ|² at ±√2
        assert!(
            x0.eval(2f64.sqrt()).abs() > x0.eval(1.3).abs()
                && x0.eval(2f64.sqrt()).abs() > x0.eval(1.5).abs()
        );
    }

    #[test]
    fn four_cat_branches() {
        assert_eq!(four_cat_conditions(0.0), 3.0);
        assert_eq!(four_cat_conditions(0.5), 0.5);
        assert_eq!(four_cat_conditions(1.0), -2.0);
        let s = state(0.9, -6.0, 0.0, 0.0).to_sigma().unwrap();
        let (_, g2) = four_cat_gains(&s, 0.5, 0.5).unwrap();
        assert!((to_db(g2)).abs() < 1e-12);
        for xi1 in [0.0, 1.0] {
            let stages = four_cat_stages(&s, xi1).unwrap();
            let a = cascade_wavefunction(&s, &stages, 0.0).unwrap();
            let b = four_cat_wavefunction(s.s(1, 1), xi1, four_cat_conditions(xi1)).unwrap();
            assert!((a.overlap(&b).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pipeline_without_stages_is_mechanical_marginal() {
        let v =
            crate::gaussian::initial_covariance(0.1, SqueezeSpec::from_db(-6.0).unwrap()).unwrap();
        let out = eps_pipeline(&v, &PipelineSpec::ideal(vec![])).unwrap();
        assert!((out.state.cov()[(0, 0)] - 0.6).abs() < 1e-14);
        assert_eq!(out.state.wigner_negativity().unwrap().delta, 0.0);
    }

    #[test]
    fn zero_weight_names_stage() {
        let v =
            crate::gaussian::initial_covariance(0.0, SqueezeSpec::linear(1.0).unwrap()).unwrap();
        let err = eps_pipeline(
            &v,
            &PipelineSpec::ideal(vec![EpsStage::new(1.0, 0.0, 1).unwrap()]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroWeight { stage: 1, .. }));
    }

    #[test]
    fn pipeline_matches_wavefunction_route() {
        let v = state(0.5, -6.0, 0.0, 0.0);
        let s = v.to_sigma().unwrap();
        let slice = Measurement {
            epsilon: 0.0,
            ..Measurement::ideal()
        };
        for n in 1..=2 {
            for xi in [0.0, 0.5, 1.0] {
                let g = solve_gain(&s, xi).unwrap();
                let spec = PipelineSpec {
                    measurement: slice,
                    ..PipelineSpec::ideal(vec![EpsStage::new(g, 0.0, n).unwrap()])
                };
                let out = eps_pipeline(&v, &spec).unwrap();
                let marg = out.state.marginal(&[Axis::XM]).unwrap();
                let wf = wavefunction_xm(&s, g, n, 0.0).unwrap();
                let mut err: f64 = 0.0;
                for i in 0..121 {
                    let x = -6.0 + 0.1 * i as f64;
                    err = err.max((marg.eval(&[x]) - Real::powi(wf.eval(x), 2)).abs());
                }
                assert!(err < 1e-6, "n={n} xi={xi} err={err}");
            }
        }
    }

    #[test]
    fn dark_count_endpoints() {
        let v = state(0.5, -6.0, 1.6, 0.0);
        let w = PolyGaussian::gaussian_wigner(&v)
            .amplify(Amplifier::new(3.0, 0.0).unwrap())
            .unwrap();
        let h = w.subtract_photons(2).unwrap().normalize().unwrap().0;
        let u = w.subtract_photons(1).unwrap().normalize().unwrap().0;
        assert_eq!(dark_count_mix(&h, &u, 1.0).unwrap(), h);
        assert_eq!(dark_count_mix(&h, &u, 0.0).unwrap(), u);
        let m = h.marginal(&[Axis::XM, Axis::PM]).unwrap();
        assert!(dark_count_mix(&h, &m, 0.5).is_err());
    }

    #[test]
    fn closed_form_matches_pipeline() {
        let v = state(0.5, -6.0, 1.6, 0.0);
        let s = v.to_sigma().unwrap();
        let g = solve_gain(&s, 1.0).unwrap();
        let amp = Amplifier::new(g, 0.0).unwrap();
        let sa = crate::gaussian::amplifier_map(&v, amp)
            .unwrap()
            .to_sigma()
            .unwrap();
        for mu in [1.0, 0.8] {
            let m = Measurement::new(0.0, 0.0, 0.1, mu).unwrap();
            let spec = PipelineSpec {
                measurement: m,
                ..PipelineSpec::ideal(vec![EpsStage {
                    amplifier: amp,
                    photons: 2,
                }])
            };
            let out = eps_pipeline(&v, &spec).unwrap();
            let cf = imperfect_wigner_closed_form(&sa, 0.1, mu).unwrap();
            let grid = GridSpec::default();
            let a = out.state.evaluate_grid(&grid).unwrap();
            let b = cf.evaluate_grid(&grid).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-6, "mu={mu}: {}", a.max_abs_diff(&b));
        }
    }
}

//! Closed-form covariance of the mechanical and optical output modes after a
//! squeezed pulse has scattered off the red-detuned optomechanical cavity.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{epr_steering_m_to_c, logarithmic_negativity, CovMatrix, SqueezeSpec};
use crate::linalg::Matrix;
use crate::real::Real;

/// Physical rates in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_m: f64,
    pub squeeze: SqueezeSpec,
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, gamma: f64, n_m: f64, squeeze: SqueezeSpec) -> Result<Self> {
        if !(g > 0.0) || !(kappa > 0.0) {
            return Err(Error::domain(
                "SystemParams",
                format!("g and kappa must be > 0 (g={g}, kappa={kappa})"),
            ));
        }
        if !(gamma >= 0.0) || !(n_m >= 0.0) {
            return Err(Error::domain(
                "SystemParams",
                format!("gamma and n_m must be >= 0 (gamma={gamma}, n_m={n_m})"),
            ));
        }
        Ok(SystemParams {
            g,
            kappa,
            gamma,
            n_m,
            squeeze,
        })
    }

    /// Rates given as `rate/2π` in MHz, the way experiments quote them.
    pub fn from_mhz(
        g: f64,
        kappa: f64,
        gamma: f64,
        n_m: f64,
        squeeze: SqueezeSpec,
    ) -> Result<Self> {
        let w = 2.0 * PI * 1e6;
        Self::new(g * w, kappa * w, gamma * w, n_m, squeeze)
    }

    /// Parameters with a prescribed cooperativity; `gamma = g²/(κ C)`.
    /// `cooperativity = ∞` gives the lossless mechanical limit.
    pub fn with_cooperativity(
        g: f64,
        kappa: f64,
        cooperativity: f64,
        n_m: f64,
        squeeze: SqueezeSpec,
    ) -> Result<Self> {
        if !(cooperativity > 0.0) {
            return Err(Error::domain("SystemParams", "cooperativity must be > 0"));
        }
        let gamma = if cooperativity.is_infinite() {
            0.0
        } else {
            g * g / (kappa * cooperativity)
        };
        Self::new(g, kappa, gamma, n_m, squeeze)
    }

    /// Effective mechanical decay `G = g²/κ + γ`.
    pub fn effective_decay(&self) -> f64 {
        self.g * self.g / self.kappa + self.gamma
    }

    /// `C_om = g²/(κγ)`, infinite when γ = 0.
    pub fn cooperativity(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.g * self.g / (self.kappa * self.gamma)
        }
    }

    /// Fraction of the mechanical decay that goes into the pulse, `g²/(κG)`.
    pub fn coupling_fraction(&self) -> f64 {
        self.g * self.g / (self.kappa * self.effective_decay())
    }

    /// The adiabatic elimination of the cavity degrades once κ is not much
    /// larger than g.
    pub fn bad_cavity_warning(&self) -> bool {
        self.kappa < 3.0 * self.g
    }
}

/// `(G, C_om)`.
pub fn effective_rates(p: &SystemParams) -> (f64, f64) {
    (p.effective_decay(), p.cooperativity())
}

/// A pulse fixed either by its duration or by its effective reflectivity
/// `R = exp(-2Gτ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseSpec {
    Duration(f64),
    Reflectivity(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedPulse {
    pub tau: f64,
    pub reflectivity: f64,
}

impl ResolvedPulse {
    pub fn transmissivity(&self) -> f64 {
        1.0 - self.reflectivity
    }
}

impl PulseSpec {
    pub fn resolve(&self, decay: f64) -> Result<ResolvedPulse> {
        match *self {
            PulseSpec::Duration(tau) => {
                if !(tau >= 0.0) || !tau.is_finite() {
                    return Err(Error::domain(
                        "PulseSpec",
                        format!("duration must be >= 0, got {tau}"),
                    ));
                }
                Ok(ResolvedPulse {
                    tau,
                    reflectivity: Real::exp(-2.0 * decay * tau),
                })
            }
            PulseSpec::Reflectivity(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::domain(
                        "PulseSpec",
                        format!("reflectivity must lie in (0, 1], got {r}"),
                    ));
                }
                Ok(ResolvedPulse {
                    tau: -Real::ln(r) / (2.0 * decay),
                    reflectivity: r,
                })
            }
        }
    }
}

/// `2Gτ/T = -ln R / (1 - R)`, with the removable singularity at R = 1 handled
/// by its series.
pub(crate) fn two_g_tau_over_t(r: f64) -> f64 {
    let t = 1.0 - r;
    if t < 1e-6 {
        1.0 + t / 2.0 + t * t / 3.0 + t * t * t / 4.0
    } else {
        -Real::ln(r) / t
    }
}

/// Post-pulse covariance matrix of the mechanical and output optical modes.
pub fn covariance_after_pulse(params: &SystemParams, pulse: PulseSpec) -> Result<CovMatrix> {
    let decay = params.effective_decay();
    let rp = pulse.resolve(decay)?;
    let r = rp.reflectivity;
    let t = rp.transmissivity();
    let a = params.coupling_fraction();
    let gam = params.gamma / decay;
    let th = 1.0 + 2.0 * params.n_m;
    let x = two_g_tau_over_t(r);
    let sx = params.squeeze.factor();
    let sp = 1.0 / sx;

    // each block is (coefficient of S) * S + (coefficient of I) * I
    let m_s = 0.5 * t * a;
    let m_i = 0.5 * (r + gam * t) * th;
    let mc_pref = (a * t * r / 4.0).sqrt();
    let mc_s = mc_pref * (a + gam * x);
    let mc_i = -mc_pref * (1.0 + gam * (x - 1.0)) * th;
    let c_s = 0.5 * (a * a * r + gam * gam + a * gam * 2.0 * x * r);
    let c_i = 0.5 * (a * t + a * gam * (r + 1.0 - 2.0 * x * r)) * th;

    let vm = [m_s * sx + m_i, m_s * sp + m_i];
    let vmc = [mc_s * sx + mc_i, mc_s * sp + mc_i];
    let vc = [c_s * sx + c_i, c_s * sp + c_i];
    let m = Matrix::from_rows([
        [vm[0], 0.0, vmc[0], 0.0],
        [0.0, vm[1], 0.0, vmc[1]],
        [vmc[0], 0.0, vc[0], 0.0],
        [0.0, vmc[1], 0.0, vc[1]],
    ]);
    let v = CovMatrix::new(m)?;
    let rep = v.check_physical();
    if !rep.physical {
        return Err(Error::numerical(
            "covariance_after_pulse",
            format!(
                "internal consistency: min symplectic eigenvalue {:.6e} at R={r}",
                rep.min_symplectic
            ),
        ));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub reflectivity: f64,
    pub tau: f64,
    pub squeeze_db: f64,
    pub log_negativity: f64,
    pub steering: f64,
}

/// Entanglement and steering over an `(R, S_in)` grid, `S_in` outermost.
pub fn correlation_sweep(
    params: &SystemParams,
    r_grid: &[f64],
    squeeze_db_grid: &[f64],
) -> Result<Vec<SweepRow>> {
    if r_grid.is_empty() || squeeze_db_grid.is_empty() {
        return Err(Error::domain(
            "correlation_sweep",
            "grids must be non-empty",
        ));
    }
    let mut rows = Vec::with_capacity(r_grid.len() * squeeze_db_grid.len());
    for &db in squeeze_db_grid {
        let p = SystemParams {
            squeeze: SqueezeSpec::from_db(db)?,
            ..*params
        };
        for &r in r_grid {
            rows.push(sweep_point(&p, r)?);
        }
    }
    Ok(rows)
}

pub fn sweep_point(params: &SystemParams, r: f64) -> Result<SweepRow> {
    let pulse = PulseSpec::Reflectivity(r);
    let v = covariance_after_pulse(params, pulse)?;
    Ok(SweepRow {
        reflectivity: r,
        tau: pulse.resolve(params.effective_decay())?.tau,
        squeeze_db: params.squeeze.db(),
        log_negativity: logarithmic_negativity(&v)?,
        steering: epr_steering_m_to_c(&v)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::initial_covariance;

    fn fig2(n_m: f64, db: f64) -> SystemParams {
        SystemParams::from_mhz(3.0, 7.0, 1.6, n_m, SqueezeSpec::from_db(db).unwrap()).unwrap()
    }

    #[test]
    fn rates_match_quoted_values() {
        let p = fig2(0.0, -6.0);
        let (g, c) = effective_rates(&p);
        assert!((g / (2.0 * PI * 1e6) - 2.885714).abs() < 1e-6);
        assert!((c - 0.803571).abs() < 1e-6);
        let tau = PulseSpec::Reflectivity(0.9).resolve(g).unwrap().tau;
        assert!((tau * 1e9 - 2.9).abs() < 0.06);
        let lossless = SystemParams { gamma: 0.0, ..p };
        assert!(lossless.cooperativity().is_infinite());
    }

    #[test]
    fn pulse_round_trip() {
        let g = 1.7e7;
        for r in [1e-3, 0.3, 0.9, 1.0 - 1e-9, 1.0] {
            let tau = PulseSpec::Reflectivity(r).resolve(g).unwrap().tau;
            let back = PulseSpec::Duration(tau).resolve(g).unwrap().reflectivity;
            assert!((back - r).abs() <= 1e-12 * r);
        }
        assert!(PulseSpec::Reflectivity(0.0).resolve(g).is_err());
        assert!(PulseSpec::Reflectivity(1.1).resolve(g).is_err());
    }

    #[test]
    fn r_one_is_initial_state() {
        let p = fig2(0.1, -6.0);
        let v = covariance_after_pulse(&p, PulseSpec::Reflectivity(1.0)).unwrap();
        let v0 = initial_covariance(0.1, p.squeeze).unwrap();
        assert!(v.matrix().max_abs_diff(v0.matrix()) < 1e-14);
    }

    #[test]
    fn full_swap_limit_without_mechanical_loss() {
        let p = SystemParams {
            gamma: 0.0,
            ..fig2(0.0, -6.0)
        };
        let v = covariance_after_pulse(&p, PulseSpec::Reflectivity(1e-12)).unwrap();
        let s = p.squeeze.factor();
        assert!((v.get(0, 0) - 0.5 * s).abs() < 1e-9);
        assert!((v.get(1, 1) - 0.5 / s).abs() < 1e-9);
    }

    #[test]
    fn vacuum_input_stays_vacuum() {
        let p = SystemParams {
            squeeze: SqueezeSpec::linear(1.0).unwrap(),
            ..fig2(0.0, 0.0)
        };
        for r in [0.01, 0.3, 0.5, 0.99] {
            let v = covariance_after_pulse(&p, PulseSpec::Reflectivity(r)).unwrap();
            assert!(v.matrix().max_abs_diff(&Matrix::identity(4).scale(0.5)) < 1e-14);
        }
    }

    #[test]
    fn lossless_mechanics_gives_pure_state() {
        for db in [-3.0, -6.0, -10.0] {
            let p = SystemParams {
                gamma: 0.0,
                ..fig2(0.0, db)
            };
            for r in [0.05, 0.5, 0.9, 0.999] {
                let v = covariance_after_pulse(&p, PulseSpec::Reflectivity(r)).unwrap();
                assert!((v.det() - 1.0 / 16.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn continuity_near_unit_reflectivity() {
        let t0 = 1e-6;
        let below = two_g_tau_over_t(1.0 - t0 * (1.0 + 1e-9));
        let above = two_g_tau_over_t(1.0 - t0 * (1.0 - 1e-9));
        assert!((below - above).abs() < 1e-12);
        let p = fig2(0.0, -6.0);
        let a =
            covariance_after_pulse(&p, PulseSpec::Reflectivity(1.0 - t0 * (1.0 + 1e-9))).unwrap();
        let b =
            covariance_after_pulse(&p, PulseSpec::Reflectivity(1.0 - t0 * (1.0 - 1e-9))).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-9);
        let a = covariance_after_pulse(&p, PulseSpec::Reflectivity(0.5)).unwrap();
        let b = covariance_after_pulse(&p, PulseSpec::Reflectivity(0.5 + 1e-9)).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-8);
    }

    #[test]
    fn no_correlations_without_interaction() {
        let row = sweep_point(&fig2(0.0, -6.0), 1.0).unwrap();
        assert!(row.log_negativity.abs() < 1e-12);
        assert!(row.steering.abs() < 1e-12);
    }

    #[test]
    fn sweep_shape() {
        let rows = correlation_sweep(&fig2(0.0, -6.0), &[0.5], &[-6.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(correlation_sweep(&fig2(0.0, -6.0), &[], &[-6.0]).is_err());
    }
}

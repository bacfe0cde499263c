//! Truncated Fock-space reference implementation of the pulse, amplifier,
//! subtraction, loss and homodyne chain.
//!
//! States are ensembles of real pure vectors over `|m⟩_M |c⟩_C`, which covers
//! everything reachable from a squeezed vacuum through these operations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::real::Real;

use crate::error::{Error, Result};
use crate::gaussian::{Amplifier, CovMatrix};
use crate::linalg::Matrix;
use crate::phase_space::{Grid, GridSpec, Measurement};
use crate::pulse::{two_g_tau_over_t, PulseSpec, SystemParams};
use crate::quad::gauss_hermite;
use crate::synthesis::PipelineSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockConfig {
    /// Number of Fock levels kept per mode.
    pub truncation: usize,
    /// Largest population allowed to leak past the truncation.
    pub edge_tolerance: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            truncation: 40,
            edge_tolerance: 1e-6,
        }
    }
}

impl FockConfig {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation < 4 {
            return Err(Error::domain(
                "FockConfig",
                format!("truncation must be >= 4, got {truncation}"),
            ));
        }
        Ok(FockConfig {
            truncation,
            ..Default::default()
        })
    }

    fn padded(&self) -> usize {
        4 * self.truncation + 40
    }

    fn check_leak(&self, tail: &[f64]) -> Result<()> {
        // tail[n] = population at level n of the untruncated vector
        let lost: f64 = tail.iter().skip(self.truncation).sum();
        if lost > self.edge_tolerance {
            let mut acc = 0.0;
            let mut need = tail.len();
            for n in (0..tail.len()).rev() {
                acc += tail[n];
                if acc > self.edge_tolerance {
                    need = n + 1;
                    break;
                }
            }
            return Err(Error::Truncation {
                population: lost,
                suggested: need.div_ceil(10) * 10,
            });
        }
        Ok(())
    }
}

/// `exp((r/2)(a² − a†²)) v` in a space of dimension `v.len()`.
fn squeeze_vector(v: &[f64], r: f64) -> Vec<f64> {
    let d = v.len();
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; d];
        for n in 0..d {
            // a² |n⟩ = √(n(n-1)) |n-2⟩, a†² |n⟩ = √((n+1)(n+2)) |n+2⟩
            if n >= 2 {
                y[n - 2] += 0.5 * r * ((n * (n - 1)) as f64).sqrt() * x[n];
            }
            if n + 2 < d {
                y[n + 2] -= 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt() * x[n];
            }
        }
        y
    };
    let norm = 0.5 * r.abs() * d as f64;
    let steps = (2.0 * norm).ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut out = v.to_vec();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..40 {
            term = apply(&term);
            let f = h / k as f64;
            let mut size = 0.0f64;
            for (a, t) in acc.iter_mut().zip(term.iter_mut()) {
                *t *= f;
                *a += *t;
                size = size.max(t.abs());
            }
            if size < 1e-18 {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Normalized Hermite functions `⟨x|n⟩`, `n < dim`.
fn hermite_functions(x: f64, dim: usize) -> Vec<f64> {
    let mut h = vec![0.0; dim];
    h[0] = Real::powf(PI, -0.25) * Real::exp(-0.5 * x * x);
    if dim > 1 {
        h[1] = core::f64::consts::SQRT_2 * x * h[0];
    }
    for n in 1..dim.saturating_sub(1) {
        h[n + 1] = (2.0 / (n + 1) as f64).sqrt() * x * h[n]
            - (n as f64 / (n + 1) as f64).sqrt() * h[n - 1];
    }
    h
}

/// Ensemble `Σ w_k |ψ_k⟩⟨ψ_k|` over the mechanical and optical modes, with
/// amplitudes stored as `ψ[m * dim + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    dim: usize,
    members: Vec<(f64, Vec<f64>)>,
}

impl TwoModeState {
    /// Mechanics in its ground state, optical pulse in a squeezed vacuum,
    /// mixed by the beam splitter of reflectivity `R`. Requires `γ = 0` and
    /// `n_m = 0`, where the joint state is pure.
    pub fn after_pulse(params: &SystemParams, pulse: PulseSpec, cfg: &FockConfig) -> Result<Self> {
        if params.gamma != 0.0 || params.n_m != 0.0 {
            return Err(Error::unsupported(
                "TwoModeState::after_pulse",
                "Fock construction needs gamma = 0 and n_m = 0; use scattering_covariance for second moments",
            ));
        }
        let rp = pulse.resolve(params.effective_decay())?;
        let (r, t) = (rp.reflectivity, rp.transmissivity());
        let dim = cfg.truncation;
        let big = cfg.padded();
        let mut vac = vec![0.0; big];
        vac[0] = 1.0;
        // X variance S/2 needs exp((r/2)(a² − a†²)) with S = e^{-2r}
        let sq = squeeze_vector(&vac, -0.5 * Real::ln(params.squeeze.factor()));
        let pops: Vec<f64> = sq.iter().map(|a| a * a).collect();
        // c_in† → −√T m† − √R c†
        let mut psi = vec![0.0; dim * dim];
        let mut kept = 0.0;
        let mut by_level = vec![0.0; 2 * dim];
        for (n, &cn) in sq.iter().enumerate() {
            if cn == 0.0 {
                continue;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            // ln C(n, k) by running sums
            let mut ln_binom = 0.0;
            for k in 0..=n {
                if k > 0 {
                    ln_binom += Real::ln((n - k + 1) as f64) - Real::ln(k as f64);
                }
                let l = n - k;
                let amp = sign
                    * cn
                    * Real::exp(
                        0.5 * ln_binom
                            + 0.5 * k as f64 * Real::ln(t.max(1e-300))
                            + 0.5 * l as f64 * Real::ln(r.max(1e-300)),
                    );
                let amp = if (k > 0 && t == 0.0) || (l > 0 && r == 0.0) {
                    0.0
                } else {
                    amp
                };
                if k < dim && l < dim {
                    psi[k * dim + l] = amp;
                    kept += amp * amp;
                } else {
                    let lvl = k.max(l).min(2 * dim - 1);
                    by_level[lvl] += amp * amp;
                }
            }
        }
        let total: f64 = pops.iter().sum();
        let leak = (total - kept).max(0.0);
        if leak > cfg.edge_tolerance {
            let mut tail = vec![0.0; 2 * dim];
            tail[dim] = leak;
            for (i, v) in by_level.iter().enumerate() {
                if i > dim {
                    tail[i] = *v;
                }
            }
            cfg.check_leak(&tail)?;
        }
        Ok(TwoModeState {
            dim,
            members: vec![(1.0, psi)],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> f64 {
        self.members
            .iter()
            .map(|(w, v)| w * v.iter().map(|a| a * a).sum::<f64>())
            .sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::ZeroWeight {
                stage: 0,
                detail: "Fock ensemble has zero trace".into(),
            });
        }
        Ok(TwoModeState {
            dim: self.dim,
            members: self
                .members
                .iter()
                .map(|(w, v)| (w / t, v.clone()))
                .collect(),
        })
    }

    fn map_optical<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Vec<Vec<f64>> {
        let d = self.dim;
        self.members
            .iter()
            .map(|(_, v)| {
                let mut out = vec![0.0; d * d];
                for m in 0..d {
                    let row = f(&v[m * d..(m + 1) * d]);
                    out[m * d..(m + 1) * d].copy_from_slice(&row[..d]);
                }
                out
            })
            .collect()
    }

    /// Phase-sensitive amplifier on the optical mode: X variance times `g`.
    pub fn amplify(&self, amp: Amplifier, cfg: &FockConfig) -> Result<Self> {
        if amp.noise != 0.0 {
            return Err(Error::unsupported(
                "TwoModeState::amplify",
                "amplifier noise n_A > 0 is not a unitary",
            ));
        }
        let d = self.dim;
        let big = cfg.padded().max(d);
        let r = -0.5 * Real::ln(amp.gain);
        // columns of the padded squeeze operator for the kept input levels
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let mut e = vec![0.0; big];
                e[j] = 1.0;
                squeeze_vector(&e, r)
            })
            .collect();
        let mut members = Vec::with_capacity(self.members.len());
        let mut tail = vec![0.0; big];
        let mut weight = 0.0;
        for (w, v) in &self.members {
            let mut out = vec![0.0; d * d];
            for m in 0..d {
                let mut row = vec![0.0; big];
                for (j, col) in cols.iter().enumerate() {
                    let a = v[m * d + j];
                    if a != 0.0 {
                        for (o, c) in row.iter_mut().zip(col) {
                            *o += a * c;
                        }
                    }
                }
                for (n, x) in row.iter().enumerate() {
                    tail[n] += w * x * x;
                }
                out[m * d..(m + 1) * d].copy_from_slice(&row[..d]);
            }
            weight += w * v.iter().map(|a| a * a).sum::<f64>();
            members.push((*w, out));
        }
        if weight > 0.0 {
            for t in &mut tail {
                *t /= weight;
            }
        }
        cfg.check_leak(&tail)?;
        Ok(TwoModeState { dim: d, members })
    }

    /// `a_C`, unnormalized.
    pub fn subtract_photon(&self) -> Self {
        let d = self.dim;
        let vs = self.map_optical(|x| {
            let mut y = vec![0.0; d];
            for n in 1..d {
                y[n - 1] = (n as f64).sqrt() * x[n];
            }
            y
        });
        TwoModeState {
            dim: d,
            members: self
                .members
                .iter()
                .zip(vs)
                .map(|((w, _), v)| (*w, v))
                .collect(),
        }
    }

    /// Pure-loss channel of transmissivity `eta` on the optical mode, by its
    /// Kraus operators.
    pub fn optical_loss(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(
                "TwoModeState::optical_loss",
                format!("eta must lie in [0, 1], got {eta}"),
            ));
        }
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let d = self.dim;
        let mut members = Vec::new();
        for (w, v) in &self.members {
            for l in 0..d {
                let mut out = vec![0.0; d * d];
                let mut size = 0.0;
                for m in 0..d {
                    for c in l..d {
                        let a = v[m * d + c];
                        if a == 0.0 {
                            continue;
                        }
                        let ln_binom = ln_choose(c, l);
                        let k = Real::exp(0.5 * ln_binom)
                            * Real::powf(eta, 0.5 * (c - l) as f64)
                            * Real::powf(1.0 - eta, 0.5 * l as f64);
                        out[m * d + c - l] = k * a;
                        size += (k * a) * (k * a);
                    }
                }
                if size > 1e-30 {
                    members.push((*w, out));
                }
            }
        }
        Ok(TwoModeState { dim: d, members })
    }

    fn mix(parts: &[(f64, TwoModeState)]) -> Result<Self> {
        let dim = parts[0].1.dim;
        let mut members = Vec::new();
        for (p, s) in parts {
            let n = s.normalized()?;
            members.extend(n.members.into_iter().map(|(w, v)| (w * p, v)));
        }
        Ok(TwoModeState { dim, members })
    }

    /// Covariance matrix in the `(X_M, P_M, X_C, P_C)` order, from the
    /// normalized state.
    pub fn covariance(&self) -> Result<CovMatrix> {
        let s = self.normalized()?;
        let d = s.dim;
        let lower = |v: &[f64], mode: usize| -> Vec<f64> {
            let mut y = vec![0.0; d * d];
            for m in 0..d {
                for c in 0..d {
                    let (n, target) = if mode == 0 {
                        (m, m.checked_sub(1).map(|mm| mm * d + c))
                    } else {
                        (c, c.checked_sub(1).map(|cc| m * d + cc))
                    };
                    if let Some(t) = target {
                        y[t] = (n as f64).sqrt() * v[m * d + c];
                    }
                }
            }
            y
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut mean_a = [0.0; 2];
        let mut aa = [[0.0; 2]; 2];
        let mut nn = [[0.0; 2]; 2];
        for (w, v) in &s.members {
            let u = [lower(v, 0), lower(v, 1)];
            for i in 0..2 {
                mean_a[i] += w * dot(v, &u[i]);
                for j in 0..2 {
                    nn[i][j] += w * dot(&u[i], &u[j]);
                    aa[i][j] += w * dot(v, &lower(&u[j], i));
                }
            }
        }
        let mut m = Matrix::zeros(4);
        let mean = [2f64.sqrt() * mean_a[0], 0.0, 2f64.sqrt() * mean_a[1], 0.0];
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 0.5 } else { 0.0 };
                let nsym = 0.5 * (nn[i][j] + nn[j][i]);
                m[(2 * i, 2 * j)] = aa[i][j] + nsym + delta - mean[2 * i] * mean[2 * j];
                m[(2 * i + 1, 2 * j + 1)] = -aa[i][j] + nsym + delta;
            }
        }
        CovMatrix::new(m)
    }

    /// `E_N = 2 ln Σ √λ` over the Schmidt coefficients of a pure state.
    pub fn log_negativity(&self) -> Result<f64> {
        if self.members.len() != 1 {
            return Err(Error::unsupported(
                "TwoModeState::log_negativity",
                "only pure states are supported",
            ));
        }
        let s = self.normalized()?;
        let d = s.dim;
        let v = &s.members[0].1;
        let mut rho = Matrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let x: f64 = (0..d).map(|c| v[i * d + c] * v[j * d + c]).sum();
                rho[(i, j)] = x;
                rho[(j, i)] = x;
            }
        }
        let sum: f64 = rho
            .symmetric_eigenvalues()
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum();
        Ok(2.0 * Real::ln(sum))
    }

    /// Windowed X-quadrature measurement of the optical mode, with efficiency
    /// applied as loss before an ideal window `exp(-(x-ζ)²/(2ε²))`.
    pub fn homodyne(&self, m: &Measurement) -> Result<MechanicalState> {
        if m.theta != 0.0 {
            return Err(Error::unsupported(
                "TwoModeState::homodyne",
                "only theta = 0 is implemented",
            ));
        }
        let state = self.optical_loss(m.efficiency)?;
        let d = self.dim;
        let (nodes, weights) = if m.epsilon == 0.0 {
            (vec![m.zeta], vec![1.0])
        } else {
            let (t, w) = gauss_hermite(64);
            (
                t.iter()
                    .map(|t| m.zeta + 2f64.sqrt() * m.epsilon * t)
                    .collect(),
                w,
            )
        };
        let mut rho = vec![0.0; d * d];
        for (x, gw) in nodes.iter().zip(&weights) {
            let h = hermite_functions(*x, d);
            for (w, v) in &state.members {
                let phi: Vec<f64> = (0..d)
                    .map(|mm| (0..d).map(|c| v[mm * d + c] * h[c]).sum())
                    .collect();
                let k = w * gw;
                for i in 0..d {
                    if phi[i] == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        rho[i * d + j] += k * phi[i] * phi[j];
                    }
                }
            }
        }
        MechanicalState::new(d, rho)
    }
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..k {
        s += Real::ln((n - j) as f64) - Real::ln((j + 1) as f64);
    }
    s
}

/// Normalized mechanical density matrix in the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanicalState {
    dim: usize,
    rho: Vec<f64>,
}

impl MechanicalState {
    pub fn new(dim: usize, rho: Vec<f64>) -> Result<Self> {
        let t: f64 = (0..dim).map(|i| rho[i * dim + i]).sum();
        if !(t > 0.0) {
            return Err(Error::ZeroWeight {
                stage: 0,
                detail: "mechanical state has zero trace".into(),
            });
        }
        Ok(MechanicalState {
            dim,
            rho: rho.iter().map(|x| x / t).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, m: usize, n: usize) -> f64 {
        self.rho[m * self.dim + n]
    }

    pub fn mean_phonon_number(&self) -> f64 {
        (0..self.dim).map(|n| n as f64 * self.element(n, n)).sum()
    }

    /// `W(x, p) = Σ ρ_mn W_mn(x, p)` with the Laguerre form of `W_mn`.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let d = self.dim;
        let r2 = x * x + p * p;
        let y = 2.0 * r2;
        let rad = (2.0 * r2).sqrt();
        let phi = Real::atan2(p, x);
        let env = Real::exp(-r2) / PI;
        let mut total = 0.0;
        for k in 0..d {
            // n = 0.., m = n + k; (√2 r)^k cos(kφ) √(n!/m!) (-1)^n L_n^k(y)
            let ang = if k == 0 {
                1.0
            } else {
                2.0 * Real::cos(k as f64 * phi)
            };
            let mut l_prev = 0.0;
            let mut l = 1.0;
            // √(n!/(n+k)!) (√2 r)^k, starting at n = 0
            let mut pref = (0..k).fold(1.0, |a, j| a * rad / ((j + 1) as f64).sqrt());
            let mut acc = 0.0;
            for n in 0..d - k {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                acc += self.element(n + k, n) * sign * pref * l;
                let kf = k as f64;
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0 + kf - y) * l - (nf + kf) * l_prev) / (nf + 1.0);
                l_prev = l;
                l = next;
                pref *= ((n + 1) as f64 / (n + 1 + k) as f64).sqrt();
            }
            total += ang * acc;
        }
        env * total
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

    /// `(⟨X⟩, ⟨P⟩, Var X, Var P)`.
    pub fn quadrature_moments(&self) -> (f64, f64, f64, f64) {
        let d = self.dim;
        let mut a = 0.0;
        let mut aa = 0.0;
        for n in 1..d {
            a += (n as f64).sqrt() * self.element(n - 1, n);
        }
        for n in 2..d {
            aa += ((n * (n - 1)) as f64).sqrt() * self.element(n - 2, n);
        }
        let nbar = self.mean_phonon_number();
        let mx = 2f64.sqrt() * a;
        (mx, 0.0, aa + nbar + 0.5 - mx * mx, -aa + nbar + 0.5)
    }
}

fn run_stages(
    start: &TwoModeState,
    spec: &PipelineSpec,
    skip_one_at: Option<usize>,
    cfg: &FockConfig,
) -> Result<TwoModeState> {
    let mut s = start.clone();
    for (k, st) in spec.stages.iter().enumerate() {
        s = s.amplify(st.amplifier, cfg)?.normalized()?;
        let n = if skip_one_at == Some(k) {
            st.photons - 1
        } else {
            st.photons
        };
        for _ in 0..n {
            s = s.subtract_photon();
            if !(s.trace() > 1e-12) {
                return Err(Error::ZeroWeight {
                    stage: k + 1,
                    detail: "photon subtraction has zero weight".into(),
                });
            }
            s = s.normalized()?;
        }
    }
    Ok(s)
}

/// The full conditional preparation in the Fock basis: loss, stages, herald
/// mixing, homodyne.
pub fn fock_pipeline(
    params: &SystemParams,
    pulse: PulseSpec,
    spec: &PipelineSpec,
    cfg: &FockConfig,
) -> Result<MechanicalState> {
    spec.validate()?;
    let start = TwoModeState::after_pulse(params, pulse, cfg)?.optical_loss(spec.eta)?;
    let heralded = run_stages(&start, spec, None, cfg)?;
    let state = if spec.nu < 1.0 {
        let idx: Vec<usize> = spec
            .stages
            .iter()
            .enumerate()
            .filter(|(_, s)| s.photons > 0)
            .map(|(k, _)| k)
            .collect();
        if idx.is_empty() {
            heralded
        } else {
            let mut parts = vec![(spec.nu, heralded)];
            for k in &idx {
                parts.push((
                    (1.0 - spec.nu) / idx.len() as f64,
                    run_stages(&start, spec, Some(*k), cfg)?,
                ));
            }
            TwoModeState::mix(&parts)?
        }
    } else {
        heralded
    };
    state.homodyne(&spec.measurement)
}

/// Post-pulse covariance from the linear scattering relations of the
/// normalized temporal modes, valid for any `γ` and `n_m`.
pub fn scattering_covariance(params: &SystemParams, pulse: PulseSpec) -> Result<CovMatrix> {
    let decay = params.effective_decay();
    let rp = pulse.resolve(decay)?;
    let (r, t) = (rp.reflectivity, rp.transmissivity());
    let (g2k, gam) = (params.g * params.g / params.kappa, params.gamma);
    let th = 0.5 * (1.0 + 2.0 * params.n_m);
    // overlap of the growing and decaying temporal modes
    let x = r.sqrt() * two_g_tau_over_t(r);
    let b = g2k / decay;
    let c = (g2k * gam).sqrt() / decay;
    let a = (t / (2.0 * decay)).sqrt();
    // inputs: (M_in, C_in, C̃_in, M_m, M̃_m)
    let mech = [
        r.sqrt(),
        -a * (2.0 * g2k).sqrt(),
        0.0,
        -a * (2.0 * gam).sqrt(),
        0.0,
    ];
    let opt = [-(b * t).sqrt(), -b * r.sqrt(), -(1.0 - b), -c * r.sqrt(), c];
    let mut out = Matrix::zeros(4);
    for (q, s) in [
        (0usize, params.squeeze.factor()),
        (1, 1.0 / params.squeeze.factor()),
    ] {
        let mut cov = [[0.0; 5]; 5];
        cov[0][0] = th;
        cov[1][1] = 0.5 * s;
        cov[2][2] = 0.5 * s;
        cov[1][2] = 0.5 * s * x;
        cov[2][1] = 0.5 * s * x;
        cov[3][3] = th;
        cov[4][4] = th;
        cov[3][4] = th * x;
        cov[4][3] = th * x;
        let form = |u: &[f64; 5], v: &[f64; 5]| -> f64 {
            (0..5)
                .map(|i| (0..5).map(|j| u[i] * cov[i][j] * v[j]).sum::<f64>())
                .sum()
        };
        out[(q, q)] = form(&mech, &mech);
        out[(q, 2 + q)] = form(&mech, &opt);
        out[(2 + q, q)] = out[(q, 2 + q)];
        out[(2 + q, 2 + q)] = form(&opt, &opt);
    }
    CovMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{logarithmic_negativity, loss_channel_cov, SqueezeSpec};
    use crate::pulse::covariance_after_pulse;

    fn lossless(db: f64) -> SystemParams {
        SystemParams::with_cooperativity(
            3.0,
            7.0,
            f64::INFINITY,
            0.0,
            SqueezeSpec::from_db(db).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn squeezed_vacuum_variances() {
        let v = squeeze_vector(
            &{
                let mut e = vec![0.0; 200];
                e[0] = 1.0;
                e
            },
            0.5,
        );
        let norm: f64 = v.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        // ⟨0|S|0⟩ = 1/√cosh r
        assert!((v[0] - 1.0 / Real::cosh(0.5f64).sqrt()).abs() < 1e-12);
        assert!(v[2] < 0.0);
    }

    #[test]
    fn pulse_state_matches_covariance() {
        let cfg = FockConfig::default();
        for r in [0.9, 0.5, 1.0] {
            let p = lossless(-6.0);
            let s = TwoModeState::after_pulse(&p, PulseSpec::Reflectivity(r), &cfg).unwrap();
            let v = s.covariance().unwrap();
            let w = covariance_after_pulse(&p, PulseSpec::Reflectivity(r)).unwrap();
            assert!(v.matrix().max_abs_diff(w.matrix()) < 1e-6, "R={r}");
            let en = s.log_negativity().unwrap();
            assert!(
                (en - logarithmic_negativity(&w).unwrap()).abs() < 1e-6,
                "R={r} {en}"
            );
        }
    }

    #[test]
    fn loss_matches_channel() {
        let cfg = FockConfig::default();
        let p = lossless(-6.0);
        let s = TwoModeState::after_pulse(&p, PulseSpec::Reflectivity(0.5), &cfg).unwrap();
        let v = s.optical_loss(0.5).unwrap().covariance().unwrap();
        let w = loss_channel_cov(
            &covariance_after_pulse(&p, PulseSpec::Reflectivity(0.5)).unwrap(),
            0.5,
        )
        .unwrap();
        assert!(v.matrix().max_abs_diff(w.matrix()) < 1e-6);
    }

    #[test]
    fn amplifier_scales_quadratures() {
        let cfg = FockConfig::default();
        let p = lossless(-3.0);
        let s = TwoModeState::after_pulse(&p, PulseSpec::Reflectivity(0.7), &cfg).unwrap();
        let amp = Amplifier::new(2.0, 0.0).unwrap();
        let v = s.amplify(amp, &cfg).unwrap().covariance().unwrap();
        let w = covariance_after_pulse(&p, PulseSpec::Reflectivity(0.7)).unwrap();
        let w = crate::gaussian::apply_symplectic(&w, &amp.phase_space_matrix()).unwrap();
        assert!(v.matrix().max_abs_diff(w.matrix()) < 1e-6);
        assert!(matches!(
            s.amplify(Amplifier::new(2.0, 0.1).unwrap(), &cfg),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn scattering_route_matches_closed_form() {
        for (com, nm) in [(0.8, 0.0), (0.055, 0.1), (f64::INFINITY, 0.0)] {
            let p = SystemParams::with_cooperativity(
                3.0,
                7.0,
                com,
                nm,
                SqueezeSpec::from_db(-6.0).unwrap(),
            )
            .unwrap();
            for r in [0.9, 0.5, 0.1, 1.0] {
                let a = scattering_covariance(&p, PulseSpec::Reflectivity(r)).unwrap();
                let b = covariance_after_pulse(&p, PulseSpec::Reflectivity(r)).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12, "C={com} R={r}");
            }
        }
    }

    #[test]
    fn wigner_of_fock_states() {
        for n in 0..4 {
            let mut rho = vec![0.0; 16];
            rho[n * 4 + n] = 1.0;
            let s = MechanicalState::new(4, rho).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((s.wigner(0.0, 0.0) - sign / PI).abs() < 1e-14);
        }
        // (|0⟩ + |1⟩)/√2 is displaced towards +X
        let s = MechanicalState::new(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(s.wigner(0.7, 0.0) > s.wigner(-0.7, 0.0));
        assert!((s.quadrature_moments().0 - 0.5f64.sqrt()).abs() < 1e-14);
        let g = s.wigner_grid(&GridSpec::square(-7.0, 7.0, 141)).unwrap();
        assert!((g.riemann_sum - 1.0).abs() < 1e-8);
    }

    #[test]
    fn truncation_guard() {
        let cfg = FockConfig {
            truncation: 6,
            edge_tolerance: 1e-6,
        };
        let err = TwoModeState::after_pulse(&lossless(-10.0), PulseSpec::Reflectivity(0.5), &cfg)
            .unwrap_err();
        match err {
            Error::Truncation { suggested, .. } => assert!(suggested > 6),
            e => panic!("{e}"),
        }
        let warm = SystemParams::with_cooperativity(
            3.0,
            7.0,
            0.8,
            0.0,
            SqueezeSpec::from_db(-6.0).unwrap(),
        )
        .unwrap();
        assert!(TwoModeState::after_pulse(
            &warm,
            PulseSpec::Reflectivity(0.5),
            &FockConfig::default()
        )
        .is_err());
    }
}

#[cfg(test)]
mod pipeline_agreement {
    use alloc::vec;

    use super::{fock_pipeline, FockConfig};
    use crate::gaussian::SqueezeSpec;
    use crate::phase_space::{GridSpec, Measurement};
    use crate::pulse::{covariance_after_pulse, PulseSpec, SystemParams};
    use crate::synthesis::{eps_pipeline, target_gains, EpsStage, PipelineSpec};

    fn lossless() -> SystemParams {
        SystemParams::with_cooperativity(
            3.0,
            7.0,
            f64::INFINITY,
            0.0,
            SqueezeSpec::from_db(-6.0).unwrap(),
        )
        .unwrap()
    }

    fn compare(r: f64, spec: &PipelineSpec) -> f64 {
        let p = lossless();
        let pulse = PulseSpec::Reflectivity(r);
        let v = covariance_after_pulse(&p, pulse).unwrap();
        let grid = GridSpec::square(-6.0, 6.0, 61);
        let a = eps_pipeline(&v, spec)
            .unwrap()
            .state
            .evaluate_grid(&grid)
            .unwrap();
        let b = fock_pipeline(&p, pulse, spec, &FockConfig::default())
            .unwrap()
            .wigner_grid(&grid)
            .unwrap();
        a.max_abs_diff(&b)
    }

    #[test]
    fn ideal_pipelines_agree() {
        for r in [0.9, 0.5] {
            let v = covariance_after_pulse(&lossless(), PulseSpec::Reflectivity(r)).unwrap();
            let g = target_gains(&v.to_sigma().unwrap()).unwrap();
            for gain in [1.0, g.g_p, g.g_f, g.g_x] {
                for n in 0..=2 {
                    let spec = PipelineSpec::ideal(vec![EpsStage::new(gain, 0.0, n).unwrap()]);
                    let d = compare(r, &spec);
                    assert!(d < 1e-3, "R={r} gain={gain} n={n}: {d:e}");
                }
            }
        }
    }

    #[test]
    fn imperfect_pipeline_agrees() {
        let v = covariance_after_pulse(&lossless(), PulseSpec::Reflectivity(0.5)).unwrap();
        let g = target_gains(&v.to_sigma().unwrap()).unwrap();
        let spec = PipelineSpec {
            stages: vec![EpsStage::new(g.g_p, 0.0, 2).unwrap()],
            measurement: Measurement::new(0.0, 1.0, 0.1, 0.8).unwrap(),
            eta: 0.9,
            nu: 0.98,
        };
        let d = compare(0.5, &spec);
        assert!(d < 1e-3, "{d:e}");
    }
}

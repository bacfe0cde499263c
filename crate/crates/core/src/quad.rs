//! Quadrature rules, orthogonal polynomials and real polynomial roots.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{jacobi_eigen, Matrix};
use crate::real::Real;

/// Nodes and weights for `∫ f(t) e^{-t²} dt ≈ Σ w_i f(t_i)`, by Golub–Welsch.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut j = Matrix::zeros(n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let (vals, vecs) = jacobi_eigen(&j, true);
    let vecs = vecs.unwrap();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (vals[k], PI.sqrt() * vecs[(0, k)] * vecs[(0, k)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval. Intervals are bisected
/// in a fixed order, so the result is deterministic.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    parts.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Integral {
                value: total,
                error: err,
                converged: true,
            };
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    let total: f64 = parts.iter().map(|p| p.2).sum();
    let err: f64 = parts.iter().map(|p| p.3).sum();
    Integral {
        value: total,
        error: err,
        converged: false,
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Coefficients of `H_n` in ascending powers.
pub fn hermite_coeffs(n: usize) -> Vec<f64> {
    let mut h0 = vec![1.0];
    if n == 0 {
        return h0;
    }
    let mut h1 = vec![0.0, 2.0];
    for k in 1..n {
        let mut h2 = vec![0.0; k + 2];
        for (i, c) in h1.iter().enumerate() {
            h2[i + 1] += 2.0 * c;
        }
        for (i, c) in h0.iter().enumerate() {
            h2[i] -= 2.0 * k as f64 * c;
        }
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Generalized Laguerre polynomial `L_n^α(x)`.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn trim(c: &[f64]) -> Vec<f64> {
    let m = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut v = c.to_vec();
    while v.len() > 1 && v[v.len() - 1].abs() <= 1e-14 * m {
        v.pop();
    }
    v
}

/// Real roots of a polynomial given by ascending coefficients, sorted.
/// Found by isolating monotone pieces between the roots of the derivative and
/// bisecting each piece; multiple roots are reported once.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let c = trim(c);
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[deg];
    let bound = 1.0 + c[..deg].iter().fold(0.0f64, |m, x| m.max((x / lead).abs()));
    let d: Vec<f64> = (1..=deg).map(|k| k as f64 * c[k]).collect();
    let mut breaks = vec![-bound];
    breaks.extend(real_roots(&d).into_iter().filter(|r| r.abs() < bound));
    breaks.push(bound);
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut roots: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (eval_poly(&c, a), eval_poly(&c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            // touching root at a critical point
            let tol = 1e-12 * scale * Real::powi(1.0 + b.abs(), deg as i32);
            if fb.abs() <= tol {
                roots.push(b);
            }
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = eval_poly(&c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * (1.0 + y.abs()));
    roots
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / core::f64::consts::SQRT_2)
}

pub fn normal_pdf(t: f64) -> f64 {
    Real::exp(-0.5 * t * t) / (2.0 * PI).sqrt()
}

/// `J_k = ∫_a^b t^k φ(t) dt` for `k = 0..=kmax`, φ the standard normal density.
/// Infinite bounds are allowed.
pub fn truncated_normal_moments(a: f64, b: f64, kmax: usize) -> Vec<f64> {
    let edge = |t: f64, k: usize| -> f64 {
        if t.is_infinite() {
            0.0
        } else {
            Real::powi(t, k as i32) * normal_pdf(t)
        }
    };
    let mut j = vec![0.0; kmax + 1];
    j[0] = normal_cdf(b) - normal_cdf(a);
    if kmax >= 1 {
        j[1] = edge(a, 0) - edge(b, 0);
    }
    for k in 2..=kmax {
        j[k] = (k - 1) as f64 * j[k - 2] + edge(a, k - 1) - edge(b, k - 1);
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * Real::powi(*x, 8)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((m8 - 105.0 / 16.0 * PI.sqrt()).abs() < 1e-11);
        let (_, w64) = gauss_hermite(64);
        assert!((w64.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_integration() {
        let r = integrate(|x| Real::exp(-x * x), -8.0, 8.0, 1e-13, 1e-13);
        assert!(r.converged && (r.value - PI.sqrt()).abs() < 1e-12);
        let r = integrate(|x| x.abs(), -1.0, 2.0, 1e-12, 1e-12);
        assert!((r.value - 2.5).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_polynomials() {
        assert_eq!(hermite(3, 0.5), 8.0 * 0.125 - 12.0 * 0.5);
        assert_eq!(hermite_coeffs(4), vec![12.0, 0.0, -48.0, 0.0, 16.0]);
        assert!(
            (laguerre(2, 0.0, 1.5) - (Real::powi(1.5f64, 2) / 2.0 - 2.0 * 1.5 + 1.0)).abs() < 1e-15
        );
        assert!((laguerre(1, 2.0, 0.3) - 2.7).abs() < 1e-15);
    }

    #[test]
    fn roots() {
        // (x-1)(x+2)(x-3)
        let r = real_roots(&[6.0, -5.0, -2.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
        let dbl = real_roots(&[1.0, -2.0, 1.0]);
        assert_eq!(dbl.len(), 1);
        assert!((dbl[0] - 1.0).abs() < 1e-6);
        let h = real_roots(&hermite_coeffs(6));
        assert_eq!(h.len(), 6);
    }

    #[test]
    fn normal_moments() {
        let j = truncated_normal_moments(f64::NEG_INFINITY, f64::INFINITY, 6);
        assert!((j[0] - 1.0).abs() < 1e-15 && j[1].abs() < 1e-15);
        assert!((j[4] - 3.0).abs() < 1e-14 && (j[6] - 15.0).abs() < 1e-13);
        let h = truncated_normal_moments(0.0, f64::INFINITY, 2);
        assert!((h[0] - 0.5).abs() < 1e-15 && (h[2] - 0.5).abs() < 1e-15);
    }
}

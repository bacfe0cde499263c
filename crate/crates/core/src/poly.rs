//! Sparse real polynomials in up to four variables.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

pub const MAX_VARS: usize = 8;

/// Relative size below which a merged coefficient is dropped.
pub const MERGE_TOL: f64 = 1e-15;

pub type Exponents = [u16; MAX_VARS];

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, f64>,
}

/// `c + Σ_j a_j y_j` in some set of variables `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl Affine {
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; nvars];
        coeffs[i] = 1.0;
        Affine {
            constant: 0.0,
            coeffs,
        }
    }
}

fn double_factorial_odd(k: u16) -> f64 {
    // (k-1)!! for even k, the k-th moment of a standard normal
    let mut acc = 1.0;
    let mut j = k as i32 - 1;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    acc
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term([0; MAX_VARS], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1.0)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = [0; MAX_VARS];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    pub fn from_affine(nvars: usize, a: &Affine) -> Self {
        let mut p = Self::constant(nvars, a.constant);
        for (i, &c) in a.coeffs.iter().enumerate() {
            let mut e = [0; MAX_VARS];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coeff(&self, e: &[u16]) -> f64 {
        let mut key = [0; MAX_VARS];
        key[..e.len()].copy_from_slice(e);
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add_term(&mut self, e: Exponents, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        let before = *entry;
        *entry += c;
        let scale = before.abs().max(c.abs());
        if entry.abs() <= MERGE_TOL * scale {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, rhs: &MultiPoly) -> MultiPoly {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> MultiPoly {
        if s == 0.0 {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn mul(&self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let mut e = *ea;
                for k in 0..MAX_VARS {
                    e[k] += eb[k];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn mul_var(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars);
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = *e;
                    e[i] += 1;
                    (e, *c)
                })
                .collect(),
        }
    }

    pub fn deriv(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.terms() {
            if e[i] > 0 {
                let mut d = *e;
                d[i] -= 1;
                out.add_term(d, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        assert!(u.len() >= self.nvars);
        let mut acc = 0.0;
        for (e, c) in self.terms() {
            let mut t = c;
            for k in 0..self.nvars {
                for _ in 0..e[k] {
                    t *= u[k];
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces each variable `i` by the affine form `forms[i]` over `new_nvars`
    /// new variables.
    pub fn substitute(&self, forms: &[Affine], new_nvars: usize) -> MultiPoly {
        assert_eq!(forms.len(), self.nvars);
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(self.nvars);
        for (i, f) in forms.iter().enumerate() {
            assert_eq!(f.coeffs.len(), new_nvars);
            let base = MultiPoly::from_affine(new_nvars, f);
            let mut pw = vec![MultiPoly::one(new_nvars)];
            for k in 1..=self.degree_in(i) as usize {
                let next = pw[k - 1].mul(&base);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = MultiPoly::zero(new_nvars);
        for (e, c) in self.terms() {
            let mut t = MultiPoly::constant(new_nvars, c);
            for i in 0..self.nvars {
                if e[i] > 0 {
                    t = t.mul(&powers[i][e[i] as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Expectation over independent standard normal variables `first..nvars`,
    /// leaving a polynomial in the first `first` variables.
    pub fn integrate_standard_normal(&self, first: usize) -> MultiPoly {
        assert!(first <= self.nvars);
        let mut out = MultiPoly::zero(first);
        for (e, c) in self.terms() {
            let mut w = c;
            for k in first..self.nvars {
                if e[k] % 2 == 1 {
                    w = 0.0;
                    break;
                }
                w *= double_factorial_odd(e[k]);
            }
            if w != 0.0 {
                let mut key = [0; MAX_VARS];
                key[..first].copy_from_slice(&e[..first]);
                out.add_term(key, w);
            }
        }
        out
    }

    /// Drops coefficients below `tol` times the largest one.
    pub fn prune(&self, tol: f64) -> MultiPoly {
        let m = self.max_abs_coeff();
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol * m)
                .map(|(e, c)| (*e, *c))
                .collect(),
        }
    }

    /// Univariate coefficients `c_k` of `x^k` for a one-variable polynomial
    /// obtained by fixing all variables except `i`.
    pub fn restrict_to_line(&self, i: usize, others: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.degree_in(i) as usize + 1];
        for (e, coeff) in self.terms() {
            let mut t = coeff;
            for k in 0..self.nvars {
                if k != i {
                    for _ in 0..e[k] {
                        t *= others[k];
                    }
                }
            }
            c[e[i] as usize] += t;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(terms: &[([u16; 2], f64)]) -> MultiPoly {
        let mut p = MultiPoly::zero(2);
        for (e, c) in terms {
            let mut k = [0; MAX_VARS];
            k[..2].copy_from_slice(e);
            p.add_term(k, *c);
        }
        p
    }

    #[test]
    fn arithmetic() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let s = x.add(&y);
        let sq = s.mul(&s);
        assert_eq!(sq, p2(&[([2, 0], 1.0), ([1, 1], 2.0), ([0, 2], 1.0)]));
        assert_eq!(sq.degree(), 2);
        assert!(sq.sub(&sq).is_zero());
        assert_eq!(sq.deriv(0), p2(&[([1, 0], 2.0), ([0, 1], 2.0)]));
        assert!((sq.eval(&[1.5, -0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(x.mul_var(1), p2(&[([1, 1], 1.0)]));
    }

    #[test]
    fn substitution_and_moments() {
        // (x + 2y)^2 with x -> 1 + z, y -> z
        let p = MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1).scale(2.0));
        let p = p.mul(&p);
        let forms = [
            Affine {
                constant: 1.0,
                coeffs: vec![1.0],
            },
            Affine {
                constant: 0.0,
                coeffs: vec![1.0],
            },
        ];
        let q = p.substitute(&forms, 1);
        assert!((q.coeff(&[0]) - 1.0).abs() < 1e-15);
        assert!((q.coeff(&[1]) - 6.0).abs() < 1e-15);
        assert!((q.coeff(&[2]) - 9.0).abs() < 1e-15);
        // E[(1 + 3z)^2] = 1 + 9
        let e = q.integrate_standard_normal(0);
        assert!((e.coeff(&[]) - 10.0).abs() < 1e-14);
        let z4 = MultiPoly::var(1, 0).mul(&MultiPoly::var(1, 0));
        let z4 = z4.mul(&z4);
        assert_eq!(z4.integrate_standard_normal(0).coeff(&[]), 3.0);
    }

    #[test]
    fn merge_tolerance_drops_cancellation() {
        let mut p = MultiPoly::constant(1, 0.1 + 0.2);
        p.add_term([0; MAX_VARS], -0.3);
        assert!(p.is_zero());
    }

    #[test]
    fn line_restriction() {
        let p = p2(&[([2, 1], 2.0), ([0, 0], 1.0), ([1, 0], -1.0)]);
        assert_eq!(p.restrict_to_line(0, &[0.0, 3.0]), vec![1.0, -1.0, 6.0]);
    }
}

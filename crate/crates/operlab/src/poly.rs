//! Polynomial utilities: univariate complex polynomials with companion-matrix
//! root finding (plus Newton polishing), and sparse multivariate polynomials
//! over a generic scalar used by the exact chiral operators.

use crate::linalg::Mat;
use crate::scalar::Scalar;
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Univariate complex polynomials (coefficients in ascending degree order).
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    /// `coeffs[k]` multiplies `x^k`; trailing zeros are trimmed.
    pub coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::zero());
        }
        CPoly { coeffs }
    }

    pub fn zero() -> Self {
        CPoly::new(vec![Complex64::zero()])
    }

    pub fn one() -> Self {
        CPoly::new(vec![Complex64::one()])
    }

    pub fn constant(c: Complex64) -> Self {
        CPoly::new(vec![c])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = CPoly::one();
        for &r in roots {
            p = p.mul(&CPoly::new(vec![-r, Complex64::one()]));
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() <= 1 {
            return CPoly::zero();
        }
        CPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * ((k + 1) as f64))
                .collect(),
        )
    }

    pub fn add(&self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Complex64::zero(); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, &c) in rhs.coeffs.iter().enumerate() {
            out[k] += c;
        }
        CPoly::new(out)
    }

    pub fn sub(&self, rhs: &CPoly) -> CPoly {
        self.add(&rhs.scale(-Complex64::one()))
    }

    pub fn scale(&self, s: Complex64) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, rhs: &CPoly) -> CPoly {
        let mut out = vec![Complex64::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }

    /// All complex roots: companion-matrix eigenvalues followed by a few
    /// Newton polishing steps.
    pub fn roots(&self) -> Vec<Complex64> {
        // Effective degree: drop tiny leading coefficients relative to the max.
        let maxc = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if maxc == 0.0 {
            return Vec::new();
        }
        let mut deg = self.coeffs.len() - 1;
        while deg > 0 && self.coeffs[deg].norm() < 1e-14 * maxc {
            deg -= 1;
        }
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[deg];
        if deg == 1 {
            return vec![-self.coeffs[0] / lead];
        }
        // Companion matrix of the monic normalisation.
        let mut comp = Mat::<Complex64>::zeros(deg, deg);
        for i in 0..deg {
            *comp.at_mut(0, i) = -self.coeffs[deg - 1 - i] / lead;
        }
        for i in 1..deg {
            *comp.at_mut(i, i - 1) = Complex64::one();
        }
        let mut roots = comp.eigenvalues();
        let dp = self.derivative();
        for r in roots.iter_mut() {
            for _ in 0..8 {
                let f = self.eval(*r);
                let df = dp.eval(*r);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                *r -= step;
                if step.norm() < 1e-15 * (1.0 + r.norm()) {
                    break;
                }
            }
        }
        roots
    }
}

// ---------------------------------------------------------------------------
// Dense univariate polynomials over a generic scalar, as plain coefficient
// vectors in ascending degree order (no trailing-zero trimming, so exact and
// floating arithmetic behave identically).
// ---------------------------------------------------------------------------

/// Monic polynomial with the given roots, ascending coefficients.
pub fn tpoly_from_roots<T: Scalar>(roots: &[T]) -> Vec<T> {
    let mut p = vec![T::one()];
    for r in roots {
        let mut next = vec![T::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] = next[k + 1].clone() + c.clone();
            next[k] = next[k].clone() - r.clone() * c.clone();
        }
        p = next;
    }
    p
}

pub fn tpoly_add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len().max(b.len())];
    for (k, c) in a.iter().enumerate() {
        out[k] = out[k].clone() + c.clone();
    }
    for (k, c) in b.iter().enumerate() {
        out[k] = out[k].clone() + c.clone();
    }
    out
}

pub fn tpoly_scale<T: Scalar>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|c| c.clone() * s.clone()).collect()
}

pub fn tpoly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return vec![T::zero()];
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + ca.clone() * cb.clone();
        }
    }
    out
}

pub fn tpoly_derivative<T: Scalar>(a: &[T]) -> Vec<T> {
    if a.len() <= 1 {
        return vec![T::zero()];
    }
    (1..a.len())
        .map(|k| a[k].clone() * T::from_i64(k as i64))
        .collect()
}

pub fn tpoly_eval<T: Scalar>(a: &[T], x: &T) -> T {
    let mut acc = T::zero();
    for c in a.iter().rev() {
        acc = acc * x.clone() + c.clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials over a generic scalar.
// ---------------------------------------------------------------------------

/// Polynomial in `nvars` variables; keys are exponent vectors. The BTreeMap
/// keeps a deterministic monomial order (lexicographic in the exponents).
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<T> {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> MPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The monomial `coeff * prod x_i^{expo[i]}`.
    pub fn monomial(expo: Vec<u32>, coeff: T) -> Self {
        let nvars = expo.len();
        let mut p = MPoly::zero(nvars);
        if !coeff.is_zero() {
            p.terms.insert(expo, coeff);
        }
        p
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0u32; nvars];
        e[i] = 1;
        MPoly::monomial(e, T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, expo: Vec<u32>, coeff: T) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(expo);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get().clone() + coeff;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&(T::zero() - T::one())))
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = MPoly::zero(self.nvars);
        if s.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            let v = c.clone() * s.clone();
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c.clone() * T::from_i64(e[i] as i64));
        }
        out
    }

    /// Total degree (0 for the zero polynomial).
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, expo: &[u32]) -> T {
        self.terms.get(expo).cloned().unwrap_or_else(T::zero)
    }

    /// Largest entry magnitude, for tolerance checks.
    pub fn max_magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }
}

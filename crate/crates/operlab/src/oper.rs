//! Second-order Fuchsian operators `L = ∂²ₓ − v(x)` attached to a Gaudin
//! configuration, the Miura construction from Bethe roots, the monic
//! polynomial solution carried by the exponent at infinity, its
//! operator-valued analogue (the Baxter-type family `𝐐(x)`), and residual
//! checks for the operator-valued second-order equation.
//!
//! The potential is
//! `v(x) = Σ λ_i(λ_i+2)/4 · (x−t_i)^{−2} + Σ μ_i (x−t_i)^{−1}`,
//! and admissible accessory parameters satisfy the two residue constraints
//! `Σμ_i = 0` and `Σt_iμ_i = λ_{m+1}(λ_{m+1}+2)/4 − Σ λ_i(λ_i+2)/4`.

use crate::gaudin::GaudinMatrices;
use crate::linalg::Mat;
use crate::poly::{
    tpoly_add, tpoly_derivative, tpoly_from_roots, tpoly_mul, tpoly_scale, CPoly,
};
use crate::repspace::GaudinConfig;
use crate::scalar::Scalar;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Clone, Debug, Error)]
pub enum OperError {
    #[error("residue constraints violated: |Σμ| = {sum_residual:.3e}, moment residual = {moment_residual:.3e}")]
    ConstraintViolation {
        sum_residual: f64,
        moment_residual: f64,
    },
    #[error("resonant sector weight: recursion pivot {pivot_index} vanishes")]
    Resonance { pivot_index: usize },
    #[error("coefficient system inconsistent: residual {residual:.3e} exceeds {tol:.3e}")]
    InconsistentSystem { residual: f64, tol: f64 },
    #[error("finite-difference stencil too coarse: halving the step changes the residual by {discrepancy:.3e}")]
    StencilTooCoarse { discrepancy: f64 },
}

/// A Fuchsian operator `∂²ₓ − v(x)` with double-pole strengths fixed by the
/// weights and simple-pole strengths given by accessory parameters μ.
#[derive(Clone, Debug)]
pub struct Oper<T> {
    /// Marked points `t_0..t_m`.
    pub points: Vec<T>,
    /// Weights `λ_0..λ_{m+1}` (the last one governs the exponent at ∞).
    pub weights: Vec<T>,
    /// Accessory parameters `μ_0..μ_m`.
    pub mu: Vec<T>,
}

impl<T: Scalar> Oper<T> {
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    /// Sector degree recovered from the weight balance
    /// `Σ_{i≤m} λ_i − λ_{m+1} = 2n`.
    pub fn degree(&self) -> usize {
        let m = self.m();
        let mut s = Complex64::zero();
        for w in &self.weights[..=m] {
            s += w.to_c64();
        }
        s -= self.weights[m + 1].to_c64();
        (s.re / 2.0).round() as usize
    }

    /// Residuals of the two residue constraints (absolute values).
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let m = self.m();
        let mut sum = T::zero();
        let mut moment = T::zero();
        for i in 0..=m {
            sum = sum + self.mu[i].clone();
            moment = moment + self.points[i].clone() * self.mu[i].clone();
        }
        let quarter = T::from_ratio(1, 4);
        let two = T::from_i64(2);
        let top = self.weights[m + 1].clone();
        let mut rhs = top.clone() * (top + two.clone()) * quarter.clone();
        for i in 0..=m {
            let w = self.weights[i].clone();
            rhs = rhs - w.clone() * (w + two.clone()) * quarter.clone();
        }
        (sum.magnitude(), (moment - rhs).magnitude())
    }

    /// `v(x)` evaluated in complex arithmetic.
    pub fn potential(&self, x: Complex64) -> Complex64 {
        let m = self.m();
        let mut acc = Complex64::zero();
        for i in 0..=m {
            let d = x - self.points[i].to_c64();
            let lam = self.weights[i].to_c64();
            acc += lam * (lam + 2.0) / 4.0 / (d * d);
            acc += self.mu[i].to_c64() / d;
        }
        acc
    }

    pub fn to_c64(&self) -> Oper<Complex64> {
        Oper {
            points: self.points.iter().map(|z| z.to_c64()).collect(),
            weights: self.weights.iter().map(|z| z.to_c64()).collect(),
            mu: self.mu.iter().map(|z| z.to_c64()).collect(),
        }
    }
}

/// Build the oper for a given accessory-parameter tuple, enforcing the two
/// residue constraints within `tol`.
pub fn oper_from_mu<T: Scalar>(
    cfg: &GaudinConfig<T>,
    mu: &[T],
    tol: f64,
) -> Result<Oper<T>, OperError> {
    assert_eq!(mu.len(), cfg.num_sites());
    let oper = Oper {
        points: cfg.points.clone(),
        weights: cfg.weights.clone(),
        mu: mu.to_vec(),
    };
    let (r1, r2) = oper.constraint_residuals();
    if r1 > tol || r2 > tol {
        return Err(OperError::ConstraintViolation {
            sum_residual: r1,
            moment_residual: r2,
        });
    }
    Ok(oper)
}

/// First-order data of the Miura form: `u(x) = Σ λ_i/(2(x−t_i)) − Σ 1/(x−w_j)`.
pub fn miura_u<T: Scalar>(cfg: &GaudinConfig<T>, roots: &[T], x: Complex64) -> Complex64 {
    let mut acc = Complex64::zero();
    for i in 0..cfg.num_sites() {
        acc += cfg.weights[i].to_c64() / (2.0 * (x - cfg.points[i].to_c64()));
    }
    for w in roots {
        acc -= 1.0 / (x - w.to_c64());
    }
    acc
}

/// The oper produced by factorizing through the first-order form,
/// `L = (∂−u)(∂+u)` with `u` as in [`miura_u`]: the accessory parameters
/// are the residues of `u² − u′` at the marked points,
/// `μ_i = λ_i(Σ_{k≠i} λ_k/(2(t_i−t_k)) − Σ_j 1/(t_i−w_j))`.
///
/// The residue of `u² − u′` at a root `w_j` equals minus the `j`-th Bethe
/// equation, so the result represents `u² − u′` faithfully only when the
/// roots solve the Bethe system; no validation is performed here.
pub fn miura<T: Scalar>(cfg: &GaudinConfig<T>, roots: &[T]) -> Oper<T> {
    let sites = cfg.num_sites();
    let half = T::from_ratio(1, 2);
    let mut mu = Vec::with_capacity(sites);
    for i in 0..sites {
        let mut acc = T::zero();
        for k in 0..sites {
            if k != i {
                let d = cfg.points[i].clone() - cfg.points[k].clone();
                acc = acc + cfg.weights[k].clone() * half.clone() * Scalar::recip(&d);
            }
        }
        for w in roots {
            let d = cfg.points[i].clone() - w.clone();
            acc = acc - Scalar::recip(&d);
        }
        mu.push(cfg.weights[i].clone() * acc);
    }
    Oper {
        points: cfg.points.clone(),
        weights: cfg.weights.clone(),
        mu,
    }
}

/// Degree-zero accessory parameters `μ⁰_i = Σ_{k≠i} λ_iλ_k/(2(t_i−t_k))`
/// read off an oper's points and weights.
fn mu_zero_of<T: Scalar>(points: &[T], weights: &[T], i: usize) -> T {
    let mut acc = T::zero();
    for j in 0..points.len() {
        if j != i {
            let num = weights[i].clone() * weights[j].clone();
            let den = (points[i].clone() - points[j].clone()) * T::from_i64(2);
            acc = acc + num * Scalar::recip(&den);
        }
    }
    acc
}

/// Check `λ_{m+1} ∈ {−2, …, −n−1}` (pivot `s(λ_{m+1}+s+1)` vanishing for
/// some `s ∈ 1..=n`). Exact scalars are tested exactly.
fn resonance_index<T: Scalar>(lam_top: &T, n: usize) -> Option<usize> {
    for s in 1..=n {
        let pivot = (lam_top.clone() + T::from_i64(s as i64 + 1)) * T::from_i64(s as i64);
        if T::EXACT {
            if pivot.magnitude() == 0.0 {
                return Some(s);
            }
        } else if pivot.magnitude() < 1e-9 * (1.0 + lam_top.magnitude()) * s as f64 {
            return Some(s);
        }
    }
    None
}

/// The monic degree-`n` polynomial solution data.
#[derive(Clone, Debug)]
pub struct QPolynomial<T> {
    /// Ascending coefficients, length `n+1`, leading coefficient 1.
    pub coeffs: Vec<T>,
    /// Maximum magnitude over the coefficient equations not consumed by the
    /// recursion; vanishes exactly when the accessory parameters lie on the
    /// joint spectrum.
    pub residual: f64,
}

impl<T: Scalar> QPolynomial<T> {
    pub fn to_cpoly(&self) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }
}

/// Solve for the unique monic polynomial `Q` of degree `n` such that
/// `Π(x−t_i)^{−λ_i/2}·Q(x)` is annihilated by the oper. Clearing the
/// prefactor turns `LΦ = 0` into
/// `T Q″ − 2Tū Q′ + P Q = 0` with `T = Π(x−t_i)`,
/// `Tū = Σ λ_i/2·T_i`, `P = Σ (μ⁰_i−μ_i) T_i`, and the coefficient
/// equations are solved by descending recursion from the exponent at ∞;
/// the pivot for the `s`-th unknown is `s(λ_{m+1}+s+1)`.
pub fn q_polynomial<T: Scalar>(oper: &Oper<T>) -> Result<QPolynomial<T>, OperError> {
    let m = oper.m();
    let n = oper.degree();
    let lam_top = oper.weights[m + 1].clone();
    if let Some(s) = resonance_index(&lam_top, n) {
        return Err(OperError::Resonance { pivot_index: s });
    }

    let t_poly = tpoly_from_roots(&oper.points);
    let t_i: Vec<Vec<T>> = (0..=m)
        .map(|i| {
            let others: Vec<T> = oper
                .points
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, z)| z.clone())
                .collect();
            tpoly_from_roots(&others)
        })
        .collect();
    let half = T::from_ratio(1, 2);
    let mut t_ubar = vec![T::zero()];
    let mut p_poly = vec![T::zero()];
    for i in 0..=m {
        t_ubar = tpoly_add(
            &t_ubar,
            &tpoly_scale(&t_i[i], &(oper.weights[i].clone() * half.clone())),
        );
        let c = mu_zero_of(&oper.points, &oper.weights[..=m], i) - oper.mu[i].clone();
        p_poly = tpoly_add(&p_poly, &tpoly_scale(&t_i[i], &c));
    }

    let rows = m + n + 1;
    let pad = |p: Vec<T>| -> Vec<T> {
        let mut out = vec![T::zero(); rows];
        for (k, c) in p.into_iter().enumerate() {
            if k < rows {
                out[k] = c;
            }
        }
        out
    };
    // Contribution of the monomial x^k to the coefficient rows.
    let contrib = |k: usize| -> Vec<T> {
        let mut mono = vec![T::zero(); k + 1];
        mono[k] = T::one();
        let second = tpoly_mul(&t_poly, &tpoly_derivative(&tpoly_derivative(&mono)));
        let first = tpoly_scale(
            &tpoly_mul(&t_ubar, &tpoly_derivative(&mono)),
            &T::from_i64(-2),
        );
        let zeroth = tpoly_mul(&p_poly, &mono);
        pad(tpoly_add(&tpoly_add(&second, &first), &zeroth))
    };

    let mut q = vec![T::zero(); n + 1];
    q[n] = T::one();
    let mut acc = contrib(n);
    let mut pivot_rows = Vec::with_capacity(n);
    for s in 1..=n {
        let row = m + n - 1 - s;
        pivot_rows.push(row);
        let col = contrib(n - s);
        let pivot = col[row].clone();
        if pivot.magnitude() == 0.0 {
            return Err(OperError::Resonance { pivot_index: s });
        }
        let val = T::zero() - acc[row].clone() * Scalar::recip(&pivot);
        for (a, c) in acc.iter_mut().zip(&col) {
            *a = a.clone() + c.clone() * val.clone();
        }
        q[n - s] = val;
    }
    let mut residual = 0.0f64;
    for (r, a) in acc.iter().enumerate() {
        if !pivot_rows.contains(&r) {
            residual = residual.max(a.magnitude());
        }
    }
    Ok(QPolynomial { coeffs: q, residual })
}

/// The operator-valued polynomial `𝐐(x) = xⁿ·Id + x^{n−1}Q_1 + … + Q_n`
/// on the weight sector.
#[derive(Clone, Debug)]
pub struct QOperator<T> {
    pub degree: usize,
    /// `Q_1..Q_n` (the leading coefficient is the identity).
    pub coeffs: Vec<Mat<T>>,
    pub dim: usize,
    /// Maximum Frobenius norm over the coefficient equations not consumed
    /// by the recursion, relative to the scale of the inputs.
    pub residual: f64,
}

impl<T: Scalar> QOperator<T> {
    pub fn eval(&self, x: &T) -> Mat<T> {
        let mut acc = Mat::<T>::identity(self.dim);
        for qs in &self.coeffs {
            // acc = acc·x + Q_s  (Horner in the scalar x).
            acc = acc.scale(x).add(qs);
        }
        acc
    }
}

/// Solve for matrix coefficients `Q_1..Q_n` such that
/// `(∂²ₓ − Σ λ_i/(x−t_i) ∂ₓ)𝐐(x) − 𝐐(x)·Σ Ĝ_i/(x−t_i) = 0` identically.
/// Denominators are cleared by `T(x)`; the coefficient equations are solved
/// by the same descending recursion as the scalar case (the matrix pivot is
/// the scalar `s(λ_{m+1}+s+1)` because `Σ T_iĜ_i` has scalar leading
/// structure), and every remaining equation is folded into the reported
/// residual.
pub fn baxter_q<T: Scalar>(
    cfg: &GaudinConfig<T>,
    mats: &GaudinMatrices<T>,
    tol: f64,
) -> Result<QOperator<T>, OperError> {
    let m = cfg.m();
    let n = cfg.n;
    let dim = mats.sector_dim;
    let lam_top = cfg.sector_weight().clone();
    if let Some(s) = resonance_index(&lam_top, n) {
        return Err(OperError::Resonance { pivot_index: s });
    }

    let t_poly = tpoly_from_roots(&cfg.points);
    let t_i: Vec<Vec<T>> = (0..=m)
        .map(|i| {
            let others: Vec<T> = cfg
                .points
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, z)| z.clone())
                .collect();
            tpoly_from_roots(&others)
        })
        .collect();
    let half = T::from_ratio(1, 2);
    let mut t_ubar = vec![T::zero()];
    for i in 0..=m {
        t_ubar = tpoly_add(
            &t_ubar,
            &tpoly_scale(&t_i[i], &(cfg.weights[i].clone() * half.clone())),
        );
    }
    // A(x) = Σ T_i(x)·Ĝ_i, coefficients as matrices (degree ≤ m; the top
    // coefficient Σ Ĝ_i vanishes by the sum rules, exactly so for exact
    // scalars).
    let mut a_coeffs: Vec<Mat<T>> = (0..=m).map(|_| Mat::zeros(dim, dim)).collect();
    for i in 0..=m {
        for (k, c) in t_i[i].iter().enumerate() {
            a_coeffs[k] = a_coeffs[k].add(&mats.ghat[i].scale(c));
        }
    }
    // Scalar pivot offset: the x^{m−1} coefficient of A equals
    // n(n − λ_tot − 1)·Id with λ_tot = Σ_{i≤m} λ_i.
    let mut lam_tot = T::zero();
    for w in &cfg.weights[..=m] {
        lam_tot = lam_tot + w.clone();
    }
    let n_t = T::from_i64(n as i64);
    let alpha = n_t.clone() * (n_t - lam_tot - T::from_i64(1));

    let rows = m + n + 1;
    let pad = |p: Vec<T>| -> Vec<T> {
        let mut out = vec![T::zero(); rows];
        for (k, c) in p.into_iter().enumerate() {
            if k < rows {
                out[k] = c;
            }
        }
        out
    };
    // Scalar part (second and first derivative terms) of the monomial x^k.
    let scalar_contrib = |k: usize| -> Vec<T> {
        let mut mono = vec![T::zero(); k + 1];
        mono[k] = T::one();
        let second = tpoly_mul(&t_poly, &tpoly_derivative(&tpoly_derivative(&mono)));
        let first = tpoly_scale(
            &tpoly_mul(&t_ubar, &tpoly_derivative(&mono)),
            &T::from_i64(-2),
        );
        pad(tpoly_add(&second, &first))
    };

    // acc[r] = Σ_k sc(k)[r]·Qm_k − Σ_k Qm_k·A_{r−k} over determined Qm_k.
    let mut acc: Vec<Mat<T>> = (0..rows).map(|_| Mat::<T>::zeros(dim, dim)).collect();
    let add_monomial = |acc: &mut Vec<Mat<T>>, k: usize, qm: &Mat<T>, sc: &[T]| {
        for r in 0..rows {
            let mut term = qm.scale(&sc[r]);
            if r >= k && r - k <= m {
                term = term.sub(&qm.matmul(&a_coeffs[r - k]));
            }
            acc[r] = acc[r].add(&term);
        }
    };
    let id = Mat::<T>::identity(dim);
    add_monomial(&mut acc, n, &id, &scalar_contrib(n));

    let mut coeffs_desc: Vec<Mat<T>> = Vec::with_capacity(n);
    let mut pivot_rows = Vec::with_capacity(n);
    for s in 1..=n {
        let row = m + n - 1 - s;
        pivot_rows.push(row);
        let sc = scalar_contrib(n - s);
        // Pivot scalar: sc(n−s)[row] − α.
        let pivot = sc[row].clone() - alpha.clone();
        if pivot.magnitude() == 0.0 {
            return Err(OperError::Resonance { pivot_index: s });
        }
        let inv = Scalar::recip(&pivot);
        let qm = acc[row].scale(&(T::zero() - inv));
        add_monomial(&mut acc, n - s, &qm, &sc);
        coeffs_desc.push(qm);
    }

    let scale = mats
        .ghat
        .iter()
        .map(|g| g.fro_norm())
        .fold(1.0, f64::max)
        * coeffs_desc
            .iter()
            .map(|q| q.fro_norm())
            .fold(1.0, f64::max);
    let mut residual = 0.0f64;
    for (r, a) in acc.iter().enumerate() {
        if !pivot_rows.contains(&r) {
            residual = residual.max(a.fro_norm());
        }
    }
    let residual = residual / scale;
    if residual > tol {
        return Err(OperError::InconsistentSystem { residual, tol });
    }
    Ok(QOperator {
        degree: n,
        coeffs: coeffs_desc,
        dim,
        residual,
    })
}

/// Max-norm residual of the operator-valued second-order equation for a
/// sampled family `H(x)`, using central finite differences at step `h` with
/// an `h` vs `h/2` consistency check.
pub fn universal_oper_residual(
    h_family: &dyn Fn(Complex64) -> Mat<Complex64>,
    cfg: &GaudinConfig<Complex64>,
    mats: &GaudinMatrices<Complex64>,
    xs: &[Complex64],
    step: f64,
) -> Result<f64, OperError> {
    let sites = cfg.num_sites();
    let mut worst = 0.0f64;
    for &x in xs {
        let d2 = |h: f64| -> (Mat<Complex64>, Mat<Complex64>) {
            let hp = Complex64::new(h, 0.0);
            let fp = h_family(x + hp);
            let fm = h_family(x - hp);
            let f0 = h_family(x);
            let second = fp
                .add(&fm)
                .sub(&f0.scale(&Complex64::new(2.0, 0.0)))
                .scale(&Complex64::new(1.0 / (h * h), 0.0));
            let first = fp.sub(&fm).scale(&Complex64::new(1.0 / (2.0 * h), 0.0));
            (second, first)
        };
        let (s1, f1) = d2(step);
        let (s2, f2) = d2(step / 2.0);
        let ref_norm = s2.fro_norm().max(f2.fro_norm()).max(1.0);
        let disc = s1.sub(&s2).fro_norm().max(f1.sub(&f2).fro_norm()) / ref_norm;
        if disc > 0.1 {
            return Err(OperError::StencilTooCoarse { discrepancy: disc });
        }
        let h0 = h_family(x);
        let mut resid = s2;
        for i in 0..sites {
            let c = cfg.weights[i] / (x - cfg.points[i]);
            resid = resid.sub(&f2.scale(&c));
            let c2 = Complex64::new(1.0, 0.0) / (x - cfg.points[i]);
            resid = resid.sub(&h0.matmul(&mats.ghat[i].scale(&c2)));
        }
        worst = worst.max(resid.fro_norm());
    }
    Ok(worst)
}

//! Polynomial models of sl2-modules and weight sectors of their tensor
//! products.
//!
//! Site `i` carries the module realized on polynomials in `y_i` with
//! generators `e_i = ∂_i`, `h_i = −2 y_i ∂_i + λ_i`, `f_i = −y_i² ∂_i +
//! λ_i y_i`. When `λ_i` is a nonnegative integer the module is the
//! `(λ_i+1)`-dimensional irreducible and monomials are capped at `y_i^{λ_i}`
//! (the generator action respects the cap automatically). The weight sector
//! of the tensor product consists of the translation-invariant homogeneous
//! polynomials of degree `n`: the kernel of `Σ_i ∂_i` in degree `n`, which
//! is computed once and for all in exact rational arithmetic.

use crate::linalg::Mat;
use crate::scalar::Scalar;
use num::BigRational;
use num_complex::Complex64;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("marked points must be distinct: points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("weight balance violated: sum of site weights minus the sector weight is {got}, expected 2n = {expected}")]
    WeightBalance { got: Complex64, expected: f64 },
    #[error("need at least two marked points, got {0}")]
    TooFewPoints(usize),
}

/// A Gaudin configuration: marked points `t_0..t_m`, site weights
/// `λ_0..λ_m`, the sector weight `λ_{m+1}`, and the sector degree `n`.
///
/// Invariant: `Σ_{i=0}^m λ_i − λ_{m+1} = 2n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaudinConfig<T> {
    pub points: Vec<T>,
    /// Length `m + 2`: the `m + 1` site weights followed by the sector
    /// weight.
    pub weights: Vec<T>,
    pub n: usize,
}

impl<T: Scalar> GaudinConfig<T> {
    pub fn new(points: Vec<T>, weights: Vec<T>, n: usize) -> Result<Self, ConfigError> {
        if points.len() < 2 {
            return Err(ConfigError::TooFewPoints(points.len()));
        }
        assert_eq!(
            weights.len(),
            points.len() + 1,
            "need one weight per point plus the sector weight"
        );
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = points[i].clone() - points[j].clone();
                if d.magnitude() < 1e-12 {
                    return Err(ConfigError::DuplicatePoints(i, j));
                }
            }
        }
        let mut s = T::zero();
        for w in &weights[..points.len()] {
            s = s + w.clone();
        }
        s = s - weights[points.len()].clone();
        let expected = 2.0 * n as f64;
        if (s.to_c64() - Complex64::new(expected, 0.0)).norm() > 1e-9 {
            return Err(ConfigError::WeightBalance {
                got: s.to_c64(),
                expected,
            });
        }
        Ok(GaudinConfig { points, weights, n })
    }

    /// Number of marked points minus one (`points.len() == m + 1`).
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    pub fn num_sites(&self) -> usize {
        self.points.len()
    }

    /// The sector weight `λ_{m+1}`.
    pub fn sector_weight(&self) -> &T {
        &self.weights[self.points.len()]
    }

    /// Per-site monomial caps: `Some(λ_i)` when `λ_i` is a nonnegative
    /// integer (finite-dimensional module), `None` otherwise.
    pub fn caps(&self) -> Vec<Option<u32>> {
        self.weights[..self.num_sites()]
            .iter()
            .map(|w| {
                let z = w.to_c64();
                let r = z.re.round();
                if (z.re - r).abs() < 1e-9 && z.im.abs() < 1e-9 && r >= 0.0 {
                    Some(r as u32)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn to_c64_config(&self) -> GaudinConfig<Complex64> {
        GaudinConfig {
            points: self.points.iter().map(|p| p.to_c64()).collect(),
            weights: self.weights.iter().map(|w| w.to_c64()).collect(),
            n: self.n,
        }
    }
}

/// A basis of monomials of fixed total degree (possibly capped per site),
/// listed in descending lexicographic order of the exponent tuples.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub nvars: usize,
    pub degree: u32,
    pub monos: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl MonomialBasis {
    pub fn enumerate(nvars: usize, degree: u32, caps: &[Option<u32>]) -> Self {
        assert_eq!(caps.len(), nvars);
        let mut monos = Vec::new();
        let mut cur = vec![0u32; nvars];
        fn rec(
            var: usize,
            remaining: u32,
            caps: &[Option<u32>],
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if var + 1 == cur.len() {
                if caps[var].map_or(true, |c| remaining <= c) {
                    cur[var] = remaining;
                    out.push(cur.clone());
                }
                return;
            }
            let hi = caps[var].map_or(remaining, |c| c.min(remaining));
            // Descending exponent for var gives descending lex order.
            for u in (0..=hi).rev() {
                cur[var] = u;
                rec(var + 1, remaining - u, caps, cur, out);
            }
        }
        rec(0, degree, caps, &mut cur, &mut monos);
        // rec produces ascending order in u_0 reversed... verify ordering:
        // u_0 descends outermost, then u_1, etc., which is descending lex.
        let index = monos
            .iter()
            .enumerate()
            .map(|(k, m)| (m.clone(), k))
            .collect();
        MonomialBasis {
            nvars,
            degree,
            monos,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.monos.len()
    }

    pub fn position(&self, mono: &[u32]) -> Option<usize> {
        self.index.get(mono).copied()
    }
}

/// Which sl2 generator acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Lower,  // e = ∂
    Cartan, // h = −2y∂ + λ
    Raise,  // f = −y²∂ + λy
}

/// The graded ambient space of a configuration up to a maximal degree, with
/// generator matrices between graded pieces.
pub struct AmbientSpace<T> {
    pub cfg: GaudinConfig<T>,
    pub bases: Vec<MonomialBasis>,
}

impl<T: Scalar> AmbientSpace<T> {
    pub fn new(cfg: &GaudinConfig<T>, max_degree: u32) -> Self {
        let caps = cfg.caps();
        let bases = (0..=max_degree)
            .map(|d| MonomialBasis::enumerate(cfg.num_sites(), d, &caps))
            .collect();
        AmbientSpace {
            cfg: cfg.clone(),
            bases,
        }
    }

    pub fn basis(&self, degree: u32) -> &MonomialBasis {
        &self.bases[degree as usize]
    }

    /// Matrix of a generator at `site`, acting from degree `degree`.
    ///
    /// Target degree is `degree − 1` for `Lower`, `degree` for `Cartan`,
    /// `degree + 1` for `Raise`; the matrix maps coefficient vectors in the
    /// source monomial basis to the target monomial basis.
    pub fn generator_matrix(&self, site: usize, gen: Generator, degree: u32) -> Mat<T> {
        let src = self.basis(degree);
        let lam = self.cfg.weights[site].clone();
        match gen {
            Generator::Lower => {
                assert!(degree >= 1, "lowering below degree zero");
                let dst = self.basis(degree - 1);
                let mut m = Mat::zeros(dst.dim(), src.dim());
                for (col, mono) in src.monos.iter().enumerate() {
                    let u = mono[site];
                    if u == 0 {
                        continue;
                    }
                    let mut tgt = mono.clone();
                    tgt[site] -= 1;
                    let row = dst.position(&tgt).expect("lowered monomial in basis");
                    *m.at_mut(row, col) = T::from_i64(u as i64);
                }
                m
            }
            Generator::Cartan => {
                let mut m = Mat::zeros(src.dim(), src.dim());
                for (col, mono) in src.monos.iter().enumerate() {
                    let u = mono[site];
                    *m.at_mut(col, col) = lam.clone() - T::from_i64(2 * u as i64);
                }
                m
            }
            Generator::Raise => {
                let dst = self.basis(degree + 1);
                let mut m = Mat::zeros(dst.dim(), src.dim());
                for (col, mono) in src.monos.iter().enumerate() {
                    let u = mono[site];
                    let coeff = lam.clone() - T::from_i64(u as i64);
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut tgt = mono.clone();
                    tgt[site] += 1;
                    // The coefficient vanishes exactly at a cap, so a capped
                    // monomial is only ever raised within the module.
                    if let Some(row) = dst.position(&tgt) {
                        *m.at_mut(row, col) = coeff;
                    } else {
                        assert!(
                            coeff.magnitude() < 1e-9,
                            "raising out of the capped basis with nonzero coefficient"
                        );
                    }
                }
                m
            }
        }
    }
}

/// The weight sector: translation-invariant homogeneous polynomials of
/// degree `n`, as exact rational coordinates in the degree-`n` monomial
/// basis.
#[derive(Clone, Debug)]
pub struct WeightSector {
    pub monos: MonomialBasis,
    /// `ambient_dim × sector_dim`; columns are the basis vectors.
    pub basis: Mat<BigRational>,
}

impl WeightSector {
    pub fn dim(&self) -> usize {
        self.basis.ncols
    }

    pub fn basis_complex(&self) -> Mat<Complex64> {
        Mat::from_fn(self.basis.nrows, self.basis.ncols, |i, j| {
            self.basis.at(i, j).to_c64()
        })
    }
}

/// Compute the weight sector of a configuration.
///
/// The divergence map `Σ_i ∂_i` from degree `n` to degree `n − 1` does not
/// involve the weights, so its kernel is always computed in exact rational
/// arithmetic over the capped monomial basis.
pub fn weight_sector<T: Scalar>(cfg: &GaudinConfig<T>) -> WeightSector {
    let caps = cfg.caps();
    let nvars = cfg.num_sites();
    let n = cfg.n as u32;
    let src = MonomialBasis::enumerate(nvars, n, &caps);
    if n == 0 {
        return WeightSector {
            monos: src,
            basis: Mat::identity(1),
        };
    }
    let dst = MonomialBasis::enumerate(nvars, n - 1, &caps);
    let mut d = Mat::<BigRational>::zeros(dst.dim(), src.dim());
    for (col, mono) in src.monos.iter().enumerate() {
        for site in 0..nvars {
            let u = mono[site];
            if u == 0 {
                continue;
            }
            let mut tgt = mono.clone();
            tgt[site] -= 1;
            let row = dst.position(&tgt).expect("lowered monomial in basis");
            *d.at_mut(row, col) = BigRational::from_i64(u as i64);
        }
    }
    let kernel = d.kernel(0.0);
    let mut basis = Mat::zeros(src.dim(), kernel.len());
    for (j, v) in kernel.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            *basis.at_mut(i, j) = x.clone();
        }
    }
    WeightSector { monos: src, basis }
}

/// Dimension of the uncapped weight sector: `binomial(n + m − 1, m − 1)`
/// for `m + 1` sites.
pub fn uncapped_sector_dim(m: usize, n: usize) -> usize {
    if m == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    binomial(n + m - 1, m - 1)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, q};

    fn config_rational(
        points: &[(i64, i64)],
        weights: &[(i64, i64)],
        n: usize,
    ) -> GaudinConfig<BigRational> {
        GaudinConfig::new(
            points.iter().map(|&(a, b)| q(a, b)).collect(),
            weights.iter().map(|&(a, b)| q(a, b)).collect(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        // Valid: λ = (1,1,1), sector weight 1, n = 1.
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(1, 1), (1, 1), (1, 1), (1, 1)],
            1,
        );
        assert_eq!(cfg.m(), 2);
        assert_eq!(cfg.sector_weight(), &q(1, 1));

        // Duplicate points rejected.
        let bad = GaudinConfig::new(
            vec![q(0, 1), q(0, 1)],
            vec![q(1, 1), q(1, 1), q(0, 1)],
            1,
        );
        assert!(matches!(bad, Err(ConfigError::DuplicatePoints(0, 1))));

        // Weight balance enforced.
        let bad = GaudinConfig::new(
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(1, 1), q(1, 1)],
            1,
        );
        assert!(matches!(bad, Err(ConfigError::WeightBalance { .. })));
    }

    #[test]
    fn monomial_enumeration_order() {
        let b = MonomialBasis::enumerate(3, 2, &[None, None, None]);
        assert_eq!(b.dim(), 6);
        // Descending lexicographic order.
        assert_eq!(b.monos[0], vec![2, 0, 0]);
        assert_eq!(b.monos[1], vec![1, 1, 0]);
        assert_eq!(b.monos[2], vec![1, 0, 1]);
        assert_eq!(b.monos[3], vec![0, 2, 0]);
        assert_eq!(b.monos[4], vec![0, 1, 1]);
        assert_eq!(b.monos[5], vec![0, 0, 2]);
        // Caps restrict the listing.
        let capped = MonomialBasis::enumerate(3, 2, &[Some(1), Some(1), Some(1)]);
        assert_eq!(capped.dim(), 3);
    }

    #[test]
    fn uncapped_dims_match_formula() {
        for m in 1..=4usize {
            for n in 0..=4usize {
                let points: Vec<BigRational> = (0..=m as i64).map(|k| q(k, 1)).collect();
                // Non-integer weights -> no caps. Make the balance work:
                // site weights 1/2 each, sector weight (m+1)/2 - 2n.
                let mut weights: Vec<BigRational> =
                    (0..=m).map(|_| q(1, 2)).collect();
                weights.push(q(m as i64 + 1, 2) - q(2 * n as i64, 1));
                let cfg = GaudinConfig::new(points, weights, n).unwrap();
                let sector = weight_sector(&cfg);
                assert_eq!(
                    sector.dim(),
                    uncapped_sector_dim(m, n),
                    "dimension mismatch at m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn capped_dims_match_tensor_decomposition() {
        // V_1 ⊗ V_1 ⊗ V_1, n = 1: two copies of the spin-1/2 module.
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(1, 1), (1, 1), (1, 1), (1, 1)],
            1,
        );
        assert_eq!(weight_sector(&cfg).dim(), 2);

        // V_2 ⊗ V_2 ⊗ V_2, n = 2: multiplicity three of highest weight 2.
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(2, 1), (2, 1), (2, 1), (2, 1)],
            2,
        );
        assert_eq!(weight_sector(&cfg).dim(), 3);

        // V_1 ⊗ V_1, n = 1: unique invariant.
        let cfg = config_rational(&[(0, 1), (1, 1)], &[(1, 1), (1, 1), (0, 1)], 1);
        assert_eq!(weight_sector(&cfg).dim(), 1);
    }

    #[test]
    fn sector_is_exact_kernel() {
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(2, 1), (2, 1), (2, 1), (2, 1)],
            2,
        );
        let sector = weight_sector(&cfg);
        // Apply Σ_i ∂_i exactly: every basis column must vanish.
        let amb = AmbientSpace::new(&cfg, 3);
        let mut div = Mat::<BigRational>::zeros(amb.basis(1).dim(), amb.basis(2).dim());
        for site in 0..cfg.num_sites() {
            div = div.add(&amb.generator_matrix(site, Generator::Lower, 2));
        }
        let image = div.matmul(&sector.basis);
        assert!(image.fro_norm() == 0.0);
    }

    #[test]
    fn sl2_relations_on_ambient() {
        // [e_i, f_i] = h_i and [h_i, e_i] = 2 e_i on the degree-2 piece.
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(3, 1), (5, 2), (1, 2), (2, 1)],
            2,
        );
        let amb = AmbientSpace::new(&cfg, 3);
        for site in 0..3 {
            let e21 = amb.generator_matrix(site, Generator::Lower, 2);
            let e32 = amb.generator_matrix(site, Generator::Lower, 3);
            let f12 = amb.generator_matrix(site, Generator::Raise, 1);
            let f23 = amb.generator_matrix(site, Generator::Raise, 2);
            let h2 = amb.generator_matrix(site, Generator::Cartan, 2);
            // e f − f e on degree 2.
            let ef = e32.matmul(&f23);
            let fe = f12.matmul(&e21);
            let comm = ef.sub(&fe);
            assert_eq!(comm, h2, "[e,f] != h at site {site}");
            // h e − e h : degree 2 -> 1.
            let h1 = amb.generator_matrix(site, Generator::Cartan, 1);
            let he = h1.matmul(&e21);
            let eh = e21.matmul(&h2);
            let lhs = he.sub(&eh);
            assert_eq!(lhs, e21.scale(&q(2, 1)), "[h,e] != 2e at site {site}");
        }
    }

    #[test]
    fn sector_total_weight() {
        // Σ_i h_i acts on the sector as the sector weight λ_{m+1}.
        let cfg = config_rational(
            &[(0, 1), (1, 1), (2, 1)],
            &[(1, 1), (1, 1), (1, 1), (1, 1)],
            1,
        );
        let sector = weight_sector(&cfg);
        let amb = AmbientSpace::new(&cfg, 2);
        let mut h = Mat::<BigRational>::zeros(sector.monos.dim(), sector.monos.dim());
        for site in 0..cfg.num_sites() {
            h = h.add(&amb.generator_matrix(site, Generator::Cartan, 1));
        }
        let hb = h.matmul(&sector.basis);
        let expect = sector.basis.scale(cfg.sector_weight());
        assert_eq!(hb, expect);
    }

    #[test]
    fn complex_config_caps() {
        let cfg = GaudinConfig::new(
            vec![c64(0.2, 0.0), c64(1.1, 0.5), c64(2.3, -0.4)],
            vec![
                c64(0.9, 0.3),
                c64(1.4, -0.2),
                c64(1.1, 0.1),
                c64(3.4, 0.2) - c64(6.0, 0.0),
            ],
            3,
        )
        .unwrap();
        assert_eq!(cfg.caps(), vec![None, None, None]);
        let sector = weight_sector(&cfg);
        assert_eq!(sector.dim(), uncapped_sector_dim(2, 3));
        assert_eq!(sector.dim(), 4);
    }
}

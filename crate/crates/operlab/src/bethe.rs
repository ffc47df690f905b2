//! Solving the Bethe Ansatz equations, Bethe vectors, and the closed-form
//! eigenvalue tuples they induce.
//!
//! The system for roots `w_1..w_n` is
//! `Σ_i λ_i/(w_j − t_i) = Σ_{s≠j} 2/(w_j − w_s)`.
//! Three complementary seed sources feed a damped Newton polisher:
//! a scaling homotopy in λ (cluster asymptotics at large λ), seeding from
//! the joint spectrum of the Gaudin matrices through the degree-`n`
//! polynomial ODE, and random multistart. Results are merged, validated and
//! deduplicated up to permutation.

use crate::gaudin::{gaudin_matrices, joint_diagonalize, mu_zero};
use crate::linalg::Mat;
use crate::poly::CPoly;
use crate::repspace::{AmbientSpace, GaudinConfig, WeightSector};
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// A solution of the Bethe system: a multiset of `n` pairwise-distinct
/// roots, stored in a canonical sorted order.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheRoots {
    pub roots: Vec<Complex64>,
}

impl BetheRoots {
    pub fn new(mut roots: Vec<Complex64>) -> Self {
        canonical_sort(&mut roots);
        BetheRoots { roots }
    }
    pub fn n(&self) -> usize {
        self.roots.len()
    }
}

#[derive(Clone, Debug, Error)]
pub enum BetheError {
    #[error("found {} of {expected} expected Bethe solutions", found.len())]
    Incomplete {
        found: Vec<BetheRoots>,
        expected: usize,
    },
    #[error("Bethe vector vanishes for the given roots (degenerate data)")]
    ZeroVector,
}

/// Sort roots by rounded (re, im) so permutations of the same multiset
/// always produce the same vector.
fn canonical_sort(roots: &mut [Complex64]) {
    roots.sort_by_key(|z| {
        (
            (z.re * 1e8).round() as i64,
            (z.im * 1e8).round() as i64,
        )
    });
}

/// Left-hand minus right-hand side of the Bethe system, one entry per root.
pub fn bae_residual(roots: &[Complex64], lam: &[Complex64], t: &[Complex64]) -> Vec<Complex64> {
    let n = roots.len();
    (0..n)
        .map(|j| {
            let mut acc = Complex64::zero();
            for (li, ti) in lam.iter().zip(t) {
                acc += li / (roots[j] - ti);
            }
            for s in 0..n {
                if s != j {
                    acc -= 2.0 / (roots[j] - roots[s]);
                }
            }
            acc
        })
        .collect()
}

pub fn bae_max_residual(roots: &[Complex64], cfg: &GaudinConfig<Complex64>) -> f64 {
    let lam = &cfg.weights[..cfg.num_sites()];
    bae_residual(roots, lam, &cfg.points)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Numerator of `Σ_i λ_i/(w − t_i)`: the polynomial
/// `Σ_i λ_i Π_{k≠i}(w − t_k)` whose zeros solve the one-root system.
pub fn master_polynomial(cfg: &GaudinConfig<Complex64>) -> CPoly {
    let t = &cfg.points;
    let mut acc = CPoly::zero();
    for i in 0..cfg.num_sites() {
        let others: Vec<Complex64> = t
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, z)| *z)
            .collect();
        acc = acc.add(&CPoly::from_roots(&others).scale(cfg.weights[i]));
    }
    acc
}

/// Magnitude scale of the Bethe system at `w` — used for a scale-aware
/// Newton convergence test.
fn bae_scale(roots: &[Complex64], lam: &[Complex64], t: &[Complex64]) -> f64 {
    let n = roots.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut acc = 0.0;
        for (li, ti) in lam.iter().zip(t) {
            acc += li.norm() / (roots[j] - ti).norm().max(1e-300);
        }
        for s in 0..n {
            if s != j {
                acc += 2.0 / (roots[j] - roots[s]).norm().max(1e-300);
            }
        }
        worst = worst.max(acc);
    }
    worst
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Damped Newton on the Bethe system with backtracking line search.
/// Returns the polished roots and whether convergence was reached.
fn newton_polish(
    start: &[Complex64],
    lam: &[Complex64],
    t: &[Complex64],
    itmax: usize,
) -> (Vec<Complex64>, bool) {
    let n = start.len();
    let mut w = start.to_vec();
    for _ in 0..itmax {
        let f = bae_residual(&w, lam, t);
        let r = vec_norm(&f);
        let tol_here = 1e-13 * (1.0 + bae_scale(&w, lam, t));
        if r < tol_here {
            return (w, true);
        }
        // Jacobian: ∂F_j/∂w_j = −Σ λ_i/(w_j−t_i)² + Σ_{s≠j} 2/(w_j−w_s)²,
        // ∂F_j/∂w_s = −2/(w_j−w_s)² for s ≠ j.
        let jac = Mat::from_fn(n, n, |j, s| {
            if j == s {
                let mut d = Complex64::zero();
                for (li, ti) in lam.iter().zip(t) {
                    d -= li / ((w[j] - ti) * (w[j] - ti));
                }
                for k in 0..n {
                    if k != j {
                        d += 2.0 / ((w[j] - w[k]) * (w[j] - w[k]));
                    }
                }
                d
            } else {
                -2.0 / ((w[j] - w[s]) * (w[j] - w[s]))
            }
        });
        let rhs = Mat::from_fn(n, 1, |j, _| -f[j]);
        let dw = match jac.solve(&rhs, 1e-300) {
            Some(x) => x,
            None => return (w, false),
        };
        let mut step = 1.0f64;
        let mut accepted = false;
        for _ in 0..50 {
            let w2: Vec<Complex64> = (0..n).map(|j| w[j] + step * dw.at(j, 0)).collect();
            let ok_dist = w2
                .iter()
                .all(|z| t.iter().all(|ti| (z - ti).norm() > 1e-13));
            if ok_dist && vec_norm(&bae_residual(&w2, lam, t)) < r {
                w = w2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            let r_now = vec_norm(&bae_residual(&w, lam, t));
            return (w.clone(), r_now < 1e-9 * (1.0 + bae_scale(&w, lam, t)));
        }
    }
    let r = vec_norm(&bae_residual(&w, lam, t));
    let ok = r < 1e-12 * (1.0 + bae_scale(&w, lam, t));
    (w, ok)
}

/// Compositions of `n` into `m` ordered nonnegative parts.
fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for rest in compositions(n - first, m - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// Real roots of the degree-`k` (physicists') Hermite polynomial.
fn hermite_roots(k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![];
    }
    // H_0 = 1, H_1 = 2x, H_{j+1} = 2x H_j − 2j H_{j−1}.
    let mut hm1 = CPoly::one();
    let mut h = CPoly::new(vec![Complex64::zero(), Complex64::new(2.0, 0.0)]);
    for j in 1..k {
        let two_x = CPoly::new(vec![Complex64::zero(), Complex64::new(2.0, 0.0)]);
        let next = two_x.mul(&h).sub(&hm1.scale(Complex64::new(2.0 * j as f64, 0.0)));
        hm1 = h;
        h = next;
    }
    let mut r: Vec<f64> = h.roots().iter().map(|z| z.re).collect();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r
}

/// Track solutions from the large-λ cluster regime down to the target λ.
///
/// At `s·λ` with large `s` the roots cluster near the zeros `z_i` of
/// `Σ λ_i/(w − t_i)`; a size-`k` cluster is shaped like the scaled Hermite
/// roots with scale `√(2/(s f'(z_i)))`. Each composition of `n` over the
/// clusters is tracked along `s → 1` with a complex phase detour.
fn homotopy_solutions(cfg: &GaudinConfig<Complex64>) -> Vec<Vec<Complex64>> {
    let n = cfg.n;
    let t = cfg.points.clone();
    let lam: Vec<Complex64> = cfg.weights[..cfg.num_sites()].to_vec();

    let zeros = master_polynomial(cfg).roots();
    if zeros.is_empty() {
        return Vec::new();
    }
    let fp = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::zero();
        for (li, ti) in lam.iter().zip(&t) {
            acc -= li / ((z - ti) * (z - ti));
        }
        acc
    };
    let mut dmin = f64::INFINITY;
    for z in &zeros {
        for ti in &t {
            dmin = dmin.min((z - ti).norm());
        }
    }
    for (a, za) in zeros.iter().enumerate() {
        for zb in &zeros[a + 1..] {
            let d = (za - zb).norm();
            if d > 0.0 {
                dmin = dmin.min(d);
            }
        }
    }
    if dmin <= 1e-12 || !dmin.is_finite() {
        return Vec::new();
    }
    let fmin = zeros
        .iter()
        .map(|z| fp(*z).norm())
        .fold(f64::INFINITY, f64::min);
    if fmin <= 1e-12 {
        return Vec::new();
    }
    let s0 = (40.0 * (2.0 / fmin) * (2.5 * (n as f64).sqrt()).powi(2) / (dmin * dmin))
        .max(50.0)
        .min(1e8);
    let gamma = 0.35f64;
    let nsteps = 40usize;

    let comps = compositions(n, zeros.len());
    let tracked: Vec<Option<Vec<Complex64>>> = comps
        .par_iter()
        .map(|comp| {
            let mut w: Vec<Complex64> = Vec::with_capacity(n);
            for (i, &k) in comp.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let delta = (Complex64::new(2.0, 0.0) / (s0 * fp(zeros[i]))).sqrt();
                if !delta.norm().is_finite() {
                    return None;
                }
                for x in hermite_roots(k) {
                    w.push(zeros[i] + delta * x);
                }
            }
            let lam_s = |s: Complex64| -> Vec<Complex64> { lam.iter().map(|l| l * s).collect() };
            let (mut w, ok) = newton_polish(&w, &lam_s(Complex64::new(s0, 0.0)), &t, 60);
            if !ok {
                return None;
            }
            // τ from 1 → 0 with adaptive bisection when a step fails.
            let mut stack: Vec<f64> = (0..nsteps).map(|k| (nsteps - 1 - k) as f64 / nsteps as f64).collect();
            stack.reverse();
            let mut prev_tau = 1.0f64;
            while let Some(tau) = stack.pop() {
                let phase = Complex64::new(0.0, gamma * tau * (1.0 - tau) * 4.0).exp();
                let s = Complex64::new(1.0, 0.0) + (s0 - 1.0) * tau * phase;
                let (w2, ok) = newton_polish(&w, &lam_s(s), &t, 60);
                let escaped = w2.iter().any(|z| z.norm() > 1e6);
                if !ok || escaped {
                    if prev_tau - tau > 1e-6 {
                        stack.push(tau);
                        stack.push((prev_tau + tau) / 2.0);
                        continue;
                    }
                    return None;
                }
                w = w2;
                prev_tau = tau;
            }
            let (w, ok) = newton_polish(&w, &lam, &t, 60);
            if ok && w.iter().all(|z| z.norm() < 1e5) {
                Some(w)
            } else {
                None
            }
        })
        .collect();
    tracked.into_iter().flatten().collect()
}

fn coeffs_padded(p: &CPoly, len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); len];
    for (k, c) in p.coeffs.iter().enumerate() {
        if k < len {
            out[k] = *c;
        }
    }
    out
}

/// Seed candidates from the joint spectrum: each eigen-tuple μ determines a
/// linear ODE `T q″ − 2Tū q′ + P q = 0` for the monic root polynomial
/// `q(x) = Π(x − w_j)`; solve its coefficient system by least squares and
/// factor.
fn spectral_solutions(
    cfg: &GaudinConfig<Complex64>,
    sector: &WeightSector,
) -> Vec<Vec<Complex64>> {
    let n = cfg.n;
    let sites = cfg.num_sites();
    let t = &cfg.points;
    let mats = gaudin_matrices(cfg, sector);
    let spec = match joint_diagonalize(&mats, 1e-10) {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    let t_poly = CPoly::from_roots(t);
    let t_i: Vec<CPoly> = (0..sites)
        .map(|i| {
            let others: Vec<Complex64> = t
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, z)| *z)
                .collect();
            CPoly::from_roots(&others)
        })
        .collect();
    let mut t_ubar = CPoly::zero();
    for i in 0..sites {
        t_ubar = t_ubar.add(&t_i[i].scale(cfg.weights[i] * 0.5));
    }
    let mu0: Vec<Complex64> = (0..sites).map(|i| mu_zero(cfg, i)).collect();

    let mut out = Vec::new();
    for mu in &spec.eigenvalues {
        let mut p = CPoly::zero();
        for i in 0..sites {
            p = p.add(&t_i[i].scale(mu0[i] - mu[i]));
        }
        let ode = |q: &CPoly| -> CPoly {
            t_poly
                .mul(&q.derivative().derivative())
                .sub(&t_ubar.mul(&q.derivative()).scale(Complex64::new(2.0, 0.0)))
                .add(&p.mul(q))
        };
        let rows = sites + n;
        let mut monic = vec![Complex64::zero(); n + 1];
        monic[n] = Complex64::new(1.0, 0.0);
        let b0 = coeffs_padded(&ode(&CPoly::new(monic.clone())), rows);
        let a = Mat::from_fn(rows, n, |r, s| {
            let mut c = monic.clone();
            c[s] = Complex64::new(1.0, 0.0);
            let col = coeffs_padded(&ode(&CPoly::new(c)), rows);
            col[r] - b0[r]
        });
        let rhs = Mat::from_fn(rows, 1, |r, _| -b0[r]);
        if let Some(x) = a.solve_lstsq(&rhs, 1e-300) {
            let mut qc: Vec<Complex64> = (0..n).map(|s| *x.at(s, 0)).collect();
            qc.push(Complex64::new(1.0, 0.0));
            out.push(CPoly::new(qc).roots());
        }
    }
    out
}

/// Random candidate starts in a disk covering the configuration.
fn multistart_starts(cfg: &GaudinConfig<Complex64>, seeds: usize) -> Vec<Vec<Complex64>> {
    let n = cfg.n;
    let t = &cfg.points;
    let c = t.iter().sum::<Complex64>() / t.len() as f64;
    let radius = 2.0 * t.iter().map(|z| (z - c).norm()).fold(0.0, f64::max) + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE7E ^ seeds as u64);
    (0..seeds)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
                    let th = rng.gen_range(0.0f64..std::f64::consts::TAU);
                    c + Complex64::from_polar(r, th)
                })
                .collect()
        })
        .collect()
}

/// Validity filters: pairwise-distinct roots, distinct from all `t_i`, no
/// escape, residual below `tol`. Returns the canonically sorted roots.
fn validate(
    roots: &[Complex64],
    cfg: &GaudinConfig<Complex64>,
    tol: f64,
) -> Option<Vec<Complex64>> {
    let n = roots.len();
    if roots.iter().any(|z| z.norm() > 1e5) {
        return None;
    }
    for j in 0..n {
        for s in (j + 1)..n {
            if (roots[j] - roots[s]).norm() < 1e-7 {
                return None;
            }
        }
        for ti in &cfg.points {
            if (roots[j] - ti).norm() < 1e-8 {
                return None;
            }
        }
    }
    if bae_max_residual(roots, cfg) > tol {
        return None;
    }
    let mut sorted = roots.to_vec();
    canonical_sort(&mut sorted);
    Some(sorted)
}

fn dedup_insert(found: &mut Vec<Vec<Complex64>>, cand: Vec<Complex64>) {
    let dup = found.iter().any(|u| {
        u.len() == cand.len()
            && u.iter()
                .zip(&cand)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                < 1e-7
    });
    if !dup {
        found.push(cand);
    }
}

/// Solve the Bethe system for the configuration. `seeds` controls the
/// number of random multistart attempts layered on top of the homotopy and
/// the spectrum-seeded candidates. Solutions are deduplicated up to
/// permutation and returned in a deterministic order. When fewer solutions
/// than the sector dimension survive validation, the partial list is
/// reported through `Incomplete`.
pub fn solve_bae(
    cfg: &GaudinConfig<Complex64>,
    tol: f64,
    seeds: usize,
) -> Result<Vec<BetheRoots>, BetheError> {
    let sector = crate::repspace::weight_sector(cfg);
    let expected = sector.dim();
    if cfg.n == 0 {
        return Ok(vec![BetheRoots { roots: vec![] }]);
    }
    if expected == 0 {
        return Ok(vec![]);
    }
    let lam: Vec<Complex64> = cfg.weights[..cfg.num_sites()].to_vec();
    let mut found: Vec<Vec<Complex64>> = Vec::new();

    if cfg.n == 1 {
        for r in master_polynomial(cfg).roots() {
            let (w, ok) = newton_polish(&[r], &lam, &cfg.points, 40);
            if !ok {
                continue;
            }
            if let Some(s) = validate(&w, cfg, tol) {
                dedup_insert(&mut found, s);
            }
        }
    } else {
        for cand in homotopy_solutions(cfg) {
            if let Some(s) = validate(&cand, cfg, tol) {
                dedup_insert(&mut found, s);
            }
        }
        if found.len() < expected && expected <= 64 {
            for cand in spectral_solutions(cfg, &sector) {
                let (w, ok) = newton_polish(&cand, &lam, &cfg.points, 60);
                if !ok {
                    continue;
                }
                if let Some(s) = validate(&w, cfg, tol) {
                    dedup_insert(&mut found, s);
                }
            }
        }
        if found.len() < expected && seeds > 0 {
            let starts = multistart_starts(cfg, seeds);
            let polished: Vec<Option<Vec<Complex64>>> = starts
                .par_iter()
                .map(|w0| {
                    let (w, ok) = newton_polish(w0, &lam, &cfg.points, 80);
                    if ok {
                        Some(w)
                    } else {
                        None
                    }
                })
                .collect();
            for cand in polished.into_iter().flatten() {
                if let Some(s) = validate(&cand, cfg, tol) {
                    dedup_insert(&mut found, s);
                }
            }
        }
    }

    found.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            match ((x.re * 1e8).round() as i64, (x.im * 1e8).round() as i64)
                .cmp(&((y.re * 1e8).round() as i64, (y.im * 1e8).round() as i64))
            {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    let sols: Vec<BetheRoots> = found.into_iter().map(|roots| BetheRoots { roots }).collect();
    if sols.len() < expected {
        return Err(BetheError::Incomplete {
            found: sols,
            expected,
        });
    }
    Ok(sols)
}

/// The Bethe vector `f(w_1)…f(w_n)·1` with `f(w) = Σ_i f_i/(w−t_i)`, in
/// sector coordinates.
#[derive(Clone, Debug)]
pub struct BetheVector {
    /// Coordinates in the sector basis.
    pub coords: Vec<Complex64>,
    /// Coefficients over the degree-`n` monomial basis.
    pub ambient: Vec<Complex64>,
    /// Relative distance of the ambient vector from the sector span
    /// (small iff the roots solve the Bethe system).
    pub sector_residual: f64,
}

pub fn bethe_vector(
    w: &BetheRoots,
    cfg: &GaudinConfig<Complex64>,
    sector: &WeightSector,
) -> Result<BetheVector, BetheError> {
    let n = cfg.n;
    assert_eq!(w.n(), n, "root count must equal the sector degree");
    let amb = AmbientSpace::new(cfg, n.max(1) as u32);
    let mut v = vec![Complex64::new(1.0, 0.0)];
    let mut scale = 1.0f64;
    for (d, wj) in w.roots.iter().enumerate() {
        let mut step = Mat::<Complex64>::zeros(amb.basis(d as u32 + 1).dim(), amb.basis(d as u32).dim());
        for i in 0..cfg.num_sites() {
            let fi = amb.generator_matrix(i, crate::repspace::Generator::Raise, d as u32);
            let coeff = Complex64::new(1.0, 0.0) / (wj - cfg.points[i]);
            step = step.add(&fi.scale(&coeff));
        }
        scale *= step.fro_norm().max(1e-300);
        v = step.mul_vec(&v);
    }
    let vnorm = vec_norm(&v);
    if vnorm <= 1e-10 * scale {
        return Err(BetheError::ZeroVector);
    }
    let basis = sector.basis_complex();
    let rhs = Mat::from_fn(v.len(), 1, |r, _| v[r]);
    let x = basis
        .solve_lstsq(&rhs, 1e-300)
        .expect("sector basis has full column rank");
    let coords: Vec<Complex64> = (0..sector.dim()).map(|k| *x.at(k, 0)).collect();
    let recon = basis.mul_vec(&coords);
    let resid: f64 = vec_norm(
        &recon
            .iter()
            .zip(&v)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    ) / vnorm;
    Ok(BetheVector {
        coords,
        ambient: v,
        sector_residual: resid,
    })
}

/// Eigenvalue tuple induced by a Bethe solution:
/// `μ_i = λ_i( Σ_{k≠i} λ_k/(2(t_i−t_k)) − Σ_j 1/(t_i−w_j) )`.
pub fn bethe_eigenvalues(w: &BetheRoots, cfg: &GaudinConfig<Complex64>) -> Vec<Complex64> {
    let sites = cfg.num_sites();
    (0..sites)
        .map(|i| {
            let mut acc = Complex64::zero();
            for k in 0..sites {
                if k != i {
                    acc += cfg.weights[k] / (2.0 * (cfg.points[i] - cfg.points[k]));
                }
            }
            for wj in &w.roots {
                acc -= 1.0 / (cfg.points[i] - wj);
            }
            cfg.weights[i] * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repspace::weight_sector;
    use crate::scalar::c64;

    fn cfg_re(t: &[f64], lam: &[f64], n: usize) -> GaudinConfig<Complex64> {
        GaudinConfig::new(
            t.iter().map(|&x| c64(x, 0.0)).collect(),
            lam.iter().map(|&x| c64(x, 0.0)).collect(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn n0_single_empty_solution() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 3.0], 0);
        let sols = solve_bae(&cfg, 1e-10, 0).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].roots.is_empty());
    }

    #[test]
    fn n1_quadratic_pair() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 1.0], 1);
        let sols = solve_bae(&cfg, 1e-10, 0).unwrap();
        assert_eq!(sols.len(), 2);
        let q = 1.0 / 3.0f64.sqrt();
        assert!((sols[0].roots[0] - c64(1.0 - q, 0.0)).norm() < 1e-10);
        assert!((sols[1].roots[0] - c64(1.0 + q, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn n1_linear_escape_reported() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[1.0, 1.0, -2.0, -2.0], 1);
        match solve_bae(&cfg, 1e-10, 0) {
            Err(BetheError::Incomplete { found, expected }) => {
                assert_eq!(expected, 2);
                assert_eq!(found.len(), 1);
                assert!((found[0].roots[0] - c64(2.0 / 3.0, 0.0)).norm() < 1e-12);
            }
            other => panic!("expected Incomplete, got {other:?}"),
        }
    }

    #[test]
    fn capped_empty_sector() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, -1.0], 2);
        let sols = solve_bae(&cfg, 1e-10, 40).unwrap();
        assert!(sols.is_empty());
    }

    #[test]
    fn discrete_series_real_roots() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[-1.0, -1.0, -1.0, -7.0], 2);
        let sols = solve_bae(&cfg, 1e-10, 40).unwrap();
        assert_eq!(sols.len(), 3);
        let h = 0.5 * 2.0f64.sqrt();
        let frozen = [
            [0.1880070253124629, 0.7536924502617008],
            [1.0 - h, 1.0 + h],
            [1.246307549738299, 1.811992974687537],
        ];
        for (sol, exp) in sols.iter().zip(&frozen) {
            for (r, e) in sol.roots.iter().zip(exp) {
                assert!(r.im.abs() < 1e-9, "root not real: {r}");
                assert!((r.re - e).abs() < 1e-8, "{} vs {}", r.re, e);
            }
        }
        // Middle solution: closed-form eigenvalue tuple (−19/4, 0, 19/4).
        let mu = bethe_eigenvalues(&sols[1], &cfg);
        assert!((mu[0] - c64(-4.75, 0.0)).norm() < 1e-10);
        assert!((mu[1]).norm() < 1e-10);
        assert!((mu[2] - c64(4.75, 0.0)).norm() < 1e-10);
        // Σμ = 0 for every solution.
        for sol in &sols {
            let s: Complex64 = bethe_eigenvalues(sol, &cfg).iter().sum();
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn capped_sector_solutions() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[2.0, 2.0, 2.0, 2.0], 2);
        let sols = solve_bae(&cfg, 1e-10, 40).unwrap();
        assert_eq!(sols.len(), 3);
        let frozen = [
            [c64(0.3385621722338523, -0.25), c64(0.3385621722338523, 0.25)],
            [
                c64(1.0 - 1.0 / 5.0f64.sqrt(), 0.0),
                c64(1.0 + 1.0 / 5.0f64.sqrt(), 0.0),
            ],
            [c64(1.661437827766148, -0.25), c64(1.661437827766148, 0.25)],
        ];
        for (sol, exp) in sols.iter().zip(&frozen) {
            for (r, e) in sol.roots.iter().zip(exp) {
                assert!((r - e).norm() < 1e-8, "{r} vs {e}");
            }
        }
    }

    #[test]
    fn complex_weights_full_count() {
        let cfg = GaudinConfig::new(
            vec![c64(0.2, 0.0), c64(1.1, 0.5), c64(2.3, -0.4)],
            vec![
                c64(0.9, 0.3),
                c64(1.4, -0.2),
                c64(1.1, 0.1),
                c64(-2.6, 0.2),
            ],
            3,
        )
        .unwrap();
        let sols = solve_bae(&cfg, 1e-9, 40).unwrap();
        assert_eq!(sols.len(), 4);
        // The solution invisible to the homotopy, recovered by spectral
        // seeding.
        let missing = [
            c64(0.552953693507059, 0.534007604339990),
            c64(1.64736874174927, -0.191664055358037),
            c64(3.61951854883814, -0.349186666883136),
        ];
        let present = sols.iter().any(|s| {
            s.roots
                .iter()
                .zip(&missing)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                < 1e-7
        });
        assert!(present, "spectrum-seeded solution not found");
        // μ-tuples match the joint spectrum as sets.
        let sector = weight_sector(&cfg);
        let mats = gaudin_matrices(&cfg, &sector);
        let spec = joint_diagonalize(&mats, 1e-10).unwrap();
        for sol in &sols {
            let mu = bethe_eigenvalues(sol, &cfg);
            let best = spec
                .eigenvalues
                .iter()
                .map(|tup| {
                    tup.iter()
                        .zip(&mu)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "μ-tuple mismatch: {best:.3e}");
        }
    }

    #[test]
    fn eigenvector_relation() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[-1.0, -1.0, -1.0, -7.0], 2);
        let sector = weight_sector(&cfg);
        let mats = gaudin_matrices(&cfg, &sector);
        let sols = solve_bae(&cfg, 1e-10, 0).unwrap();
        for sol in &sols {
            let bv = bethe_vector(sol, &cfg, &sector).unwrap();
            assert!(bv.sector_residual < 1e-10);
            let mu = bethe_eigenvalues(sol, &cfg);
            let vn = bv.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..cfg.num_sites() {
                let gv = mats.g[i].mul_vec(&bv.coords);
                let r: f64 = gv
                    .iter()
                    .zip(&bv.coords)
                    .map(|(a, b)| (a - mu[i] * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(r < 1e-8 * vn, "site {i}: residual {r:.3e}");
            }
        }
    }

    #[test]
    fn vector_symmetric_in_roots() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[2.0, 2.0, 2.0, 2.0], 2);
        let sector = weight_sector(&cfg);
        let q = 1.0 / 5.0f64.sqrt();
        let fwd = BetheRoots {
            roots: vec![c64(1.0 - q, 0.0), c64(1.0 + q, 0.0)],
        };
        let rev = BetheRoots {
            roots: vec![c64(1.0 + q, 0.0), c64(1.0 - q, 0.0)],
        };
        let a = bethe_vector(&fwd, &cfg, &sector).unwrap();
        let b = bethe_vector(&rev, &cfg, &sector).unwrap();
        let diff: f64 = a
            .ambient
            .iter()
            .zip(&b.ambient)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13, "asymmetry {diff:.3e}");
    }

    #[test]
    fn vector_n1_closed_form() {
        let cfg = cfg_re(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 1.0], 1);
        let sector = weight_sector(&cfg);
        let w = c64(1.0 + 1.0 / 3.0f64.sqrt(), 0.0);
        let bv = bethe_vector(
            &BetheRoots { roots: vec![w] },
            &cfg,
            &sector,
        )
        .unwrap();
        // f(w)·1 = Σ_i λ_i/(w−t_i) · y_i over the degree-1 monomials
        // (basis order y_0, y_1, y_2 by descending-lex exponents).
        for (i, c) in bv.ambient.iter().enumerate() {
            let expect = c64(1.0, 0.0) / (w - cfg.points[i]);
            assert!((c - expect).norm() < 1e-14);
        }
        assert!(bv.sector_residual < 1e-12);
    }
}

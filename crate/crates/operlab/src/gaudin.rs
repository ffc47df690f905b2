//! The commuting quadratic Gaudin Hamiltonians on a weight sector, and their
//! simultaneous diagonalization.
//!
//! On the ambient polynomial space the Hamiltonian at site `i` is
//! `G_i = Σ_{j≠i} Ω_{ij}/(t_i − t_j)` with
//! `Ω_{ij} = e_i f_j + f_i e_j + ½ h_i h_j`, which is exactly the
//! second-order differential operator
//! `Σ_{j≠i}(t_i−t_j)^{−1}[−(y_i−y_j)²∂_i∂_j + (y_i−y_j)(λ_i∂_j−λ_j∂_i)
//! + λ_iλ_j/2]`. Building it from generator compositions keeps the capped
//! modules exact. The shifted family is `Ĝ_i = G_i − μ⁰_i` with
//! `μ⁰_i = Σ_{j≠i} λ_iλ_j/(2(t_i−t_j))` (the degree-zero eigenvalues).

use crate::linalg::{cvec_dot, cvec_norm, Mat};
use crate::repspace::{AmbientSpace, GaudinConfig, Generator, WeightSector};
use crate::scalar::Scalar;
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Clone, Debug, Error)]
pub enum GaudinError {
    #[error("Hamiltonians do not commute: max pairwise commutator residual {residual:.3e} exceeds {tol:.3e}")]
    NotCommuting { residual: f64, tol: f64 },
    #[error("joint diagonalization failed: {0}")]
    NonDiagonalizable(String),
}

/// The family of Gaudin matrices restricted to a weight sector.
#[derive(Clone, Debug)]
pub struct GaudinMatrices<T> {
    /// `G_i` on the sector, one per site.
    pub g: Vec<Mat<T>>,
    /// `Ĝ_i = G_i − μ⁰_i · Id`.
    pub ghat: Vec<Mat<T>>,
    /// Degree-zero eigenvalues `μ⁰_i`.
    pub mu0: Vec<T>,
    pub sector_dim: usize,
}

/// Degree-zero eigenvalue `μ⁰_i = Σ_{j≠i} λ_iλ_j / (2(t_i−t_j))`.
pub fn mu_zero<T: Scalar>(cfg: &GaudinConfig<T>, i: usize) -> T {
    let mut acc = T::zero();
    for j in 0..cfg.num_sites() {
        if j == i {
            continue;
        }
        let num = cfg.weights[i].clone() * cfg.weights[j].clone();
        let den = (cfg.points[i].clone() - cfg.points[j].clone()) * T::from_i64(2);
        acc = acc + num * Scalar::recip(&den);
    }
    acc
}

/// Build the Gaudin Hamiltonians on the ambient degree-`n` space and
/// restrict them to the sector.
pub fn gaudin_matrices<T: Scalar>(
    cfg: &GaudinConfig<T>,
    sector: &WeightSector,
) -> GaudinMatrices<T> {
    let n = cfg.n as u32;
    let sites = cfg.num_sites();
    let amb = AmbientSpace::new(cfg, n + 1);
    let ambient_dim = amb.basis(n).dim();
    assert_eq!(ambient_dim, sector.monos.dim());

    // Cache the generator matrices needed for Ω_ij on degree n.
    let e_from_n: Vec<Mat<T>> = (0..sites)
        .map(|i| {
            if n >= 1 {
                amb.generator_matrix(i, Generator::Lower, n)
            } else {
                Mat::zeros(0, 1)
            }
        })
        .collect();
    let e_from_n1: Vec<Mat<T>> = (0..sites)
        .map(|i| amb.generator_matrix(i, Generator::Lower, n + 1))
        .collect();
    let f_from_n: Vec<Mat<T>> = (0..sites)
        .map(|i| amb.generator_matrix(i, Generator::Raise, n))
        .collect();
    let f_from_nm1: Vec<Mat<T>> = (0..sites)
        .map(|i| {
            if n >= 1 {
                amb.generator_matrix(i, Generator::Raise, n - 1)
            } else {
                Mat::zeros(1, 0)
            }
        })
        .collect();
    let h_on_n: Vec<Mat<T>> = (0..sites)
        .map(|i| amb.generator_matrix(i, Generator::Cartan, n))
        .collect();

    // Ω_ij = e_i f_j + f_i e_j + ½ h_i h_j as an endomorphism of degree n.
    let omega = |i: usize, j: usize| -> Mat<T> {
        let mut acc = e_from_n1[i].matmul(&f_from_n[j]);
        if n >= 1 {
            acc = acc.add(&f_from_nm1[i].matmul(&e_from_n[j]));
        }
        let hh = h_on_n[i].matmul(&h_on_n[j]).scale(&T::from_ratio(1, 2));
        acc.add(&hh)
    };

    let basis: Mat<T> = Mat::from_fn(sector.basis.nrows, sector.basis.ncols, |r, c| {
        T::from_rational(sector.basis.at(r, c))
    });

    let mut g = Vec::with_capacity(sites);
    let mut ghat = Vec::with_capacity(sites);
    let mut mu0 = Vec::with_capacity(sites);
    for i in 0..sites {
        let mut gi_ambient = Mat::zeros(ambient_dim, ambient_dim);
        for j in 0..sites {
            if j == i {
                continue;
            }
            let inv = Scalar::recip(&(cfg.points[i].clone() - cfg.points[j].clone()));
            gi_ambient = gi_ambient.add(&omega(i, j).scale(&inv));
        }
        // Restrict: solve B X = G_i B (consistent since the sector is
        // invariant).
        let rhs = gi_ambient.matmul(&basis);
        let x = basis
            .solve_lstsq(&rhs, 1e-13)
            .expect("sector basis has full column rank");
        let mu = mu_zero(cfg, i);
        let mut hat = x.clone();
        for d in 0..hat.nrows {
            let v = hat.at(d, d).clone() - mu.clone();
            *hat.at_mut(d, d) = v;
        }
        g.push(x);
        ghat.push(hat);
        mu0.push(mu);
    }
    GaudinMatrices {
        g,
        ghat,
        mu0,
        sector_dim: sector.dim(),
    }
}

/// Maximum pairwise commutator residual `‖[G_i, G_j]‖_F`, normalized by the
/// product of the operator norms (plus one).
pub fn commutator_residual<T: Scalar>(mats: &GaudinMatrices<T>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..mats.g.len() {
        for j in (i + 1)..mats.g.len() {
            let ab = mats.g[i].matmul(&mats.g[j]);
            let ba = mats.g[j].matmul(&mats.g[i]);
            let num = ab.sub(&ba).fro_norm();
            let den = mats.g[i].fro_norm() * mats.g[j].fro_norm() + 1.0;
            worst = worst.max(num / den);
        }
    }
    worst
}

/// Residuals of the two sum rules: `‖Σ G_i‖` and
/// `‖Σ t_i Ĝ_i − n(n−λ−1)·Id‖` with `λ = Σ_{i≤m} λ_i`.
pub fn sum_rule_residuals<T: Scalar>(cfg: &GaudinConfig<T>, mats: &GaudinMatrices<T>) -> (f64, f64) {
    let dim = mats.sector_dim;
    let mut s = Mat::<T>::zeros(dim, dim);
    for gi in &mats.g {
        s = s.add(gi);
    }
    let r1 = s.fro_norm();

    let mut s2 = Mat::<T>::zeros(dim, dim);
    for (i, gh) in mats.ghat.iter().enumerate() {
        s2 = s2.add(&gh.scale(&cfg.points[i]));
    }
    let mut lambda_sum = T::zero();
    for w in &cfg.weights[..cfg.num_sites()] {
        lambda_sum = lambda_sum + w.clone();
    }
    let n = T::from_i64(cfg.n as i64);
    let scalar = n.clone() * (n - lambda_sum - T::from_i64(1));
    let expect = Mat::<T>::identity(dim).scale(&scalar);
    let r2 = s2.sub(&expect).fro_norm();
    (r1, r2)
}

/// The joint spectrum of the commuting family.
#[derive(Clone, Debug)]
pub struct JointSpectrum {
    /// One tuple `(μ_0..μ_m)` per joint eigenvector, in lexicographic order.
    pub eigenvalues: Vec<Vec<Complex64>>,
    /// Unit-norm coordinate vectors in the sector basis, parallel to
    /// `eigenvalues`.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Multiplicity attached to each listed tuple (1 for simple spectrum).
    pub multiplicities: Vec<usize>,
    /// Max over sites of `‖G_i v − μ_i v‖` per eigenvector.
    pub residuals: Vec<f64>,
    /// Minimum over pairs of tuples of the sup-distance between them
    /// (`f64::INFINITY` for a single tuple).
    pub min_gap: f64,
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn tuple_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Spectrum of one random combination draw, as (tuples, vectors).
fn spectrum_for_draw(
    mats: &GaudinMatrices<Complex64>,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>, Vec<usize>), GaudinError> {
    let dim = mats.sector_dim;
    let sites = mats.g.len();
    let mut combo = Mat::<Complex64>::zeros(dim, dim);
    let mut scale = 0.0f64;
    for gi in &mats.ghat {
        let c: f64 = rng.gen_range(-1.0..1.0);
        combo = combo.add(&gi.scale(&Complex64::new(c, 0.0)));
        scale = scale.max(gi.fro_norm());
    }
    let hnorm = combo.fro_norm().max(1.0);
    let gap = 1e-8 * hnorm;

    let mut evs = combo.eigenvalues();
    evs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    // Cluster by the gap threshold.
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for ev in evs {
        match clusters.last_mut() {
            Some(cl) if (ev - *cl.last().unwrap()).norm() <= gap => cl.push(ev),
            _ => clusters.push(vec![ev]),
        }
    }

    let mut tuples = Vec::new();
    let mut vectors = Vec::new();
    let mut mults = Vec::new();
    for cl in &clusters {
        let mean: Complex64 = cl.iter().sum::<Complex64>() / cl.len() as f64;
        if cl.len() == 1 {
            let (v, _sv) = combo.eigenvector_for(mean);
            let mu: Vec<Complex64> = (0..sites)
                .map(|i| cvec_dot(&v, &mats.g[i].mul_vec(&v)))
                .collect();
            tuples.push(mu);
            vectors.push(v);
            mults.push(1);
            continue;
        }
        // Degenerate cluster: measure the geometric multiplicity of the
        // combination at the cluster mean.
        let mut shifted = combo.clone();
        for d in 0..dim {
            *shifted.at_mut(d, d) -= mean;
        }
        let sv = shifted.singular_values();
        let geo = sv.iter().filter(|&&s| s <= gap * 10.0).count();
        if geo < cl.len() {
            return Err(GaudinError::NonDiagonalizable(format!(
                "Jordan block detected: eigenvalue {mean} has algebraic multiplicity {} but geometric multiplicity {geo}",
                cl.len()
            )));
        }
        // Diagonalizable degeneracy: check whether the whole family is
        // scalar on the eigenspace.
        let na = shifted.to_na();
        let svd = na.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[a]
                .partial_cmp(&svd.singular_values[b])
                .unwrap()
        });
        let basis_vecs: Vec<Vec<Complex64>> = order[..cl.len()]
            .iter()
            .map(|&k| (0..dim).map(|j| vt[(k, j)].conj()).collect())
            .collect();
        let mut all_scalar = true;
        let mut mu_mean = vec![Complex64::zero(); sites];
        for v in &basis_vecs {
            for i in 0..sites {
                let gv = mats.g[i].mul_vec(v);
                let mu = cvec_dot(v, &gv);
                mu_mean[i] += mu / cl.len() as f64;
                let mut resid = gv.clone();
                for (r, x) in resid.iter_mut().zip(v) {
                    *r -= mu * x;
                }
                if cvec_norm(&resid) > tol.max(1e-7) * scale.max(1.0) {
                    all_scalar = false;
                }
            }
        }
        if !all_scalar {
            return Err(GaudinError::NonDiagonalizable(format!(
                "degenerate cluster at {mean} (size {}) is not jointly scalar; refine the draw or treat as non-generic",
                cl.len()
            )));
        }
        for v in basis_vecs {
            tuples.push(mu_mean.clone());
            vectors.push(v);
            mults.push(cl.len());
        }
    }
    Ok((tuples, vectors, mults))
}

/// Simultaneously diagonalize the family by a random real linear
/// combination, with three independent draws cross-validated against each
/// other. Eigenvalue tuples are read off as Rayleigh quotients and reported
/// in lexicographic order.
pub fn joint_diagonalize(
    mats: &GaudinMatrices<Complex64>,
    tol: f64,
) -> Result<JointSpectrum, GaudinError> {
    let comm = commutator_residual(mats);
    if comm > 1e-6 {
        return Err(GaudinError::NotCommuting {
            residual: comm,
            tol: 1e-6,
        });
    }
    let sites = mats.g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A75_D1A7);
    let mut draws = Vec::new();
    for _ in 0..3 {
        draws.push(spectrum_for_draw(mats, &mut rng, tol)?);
    }

    // Cross-validate: every tuple of the first draw must appear in each
    // other draw within tolerance.
    let scale: f64 = mats
        .g
        .iter()
        .map(|g| g.fro_norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let match_tol = 1e-6 * scale;
    let (tuples, vectors, mults) = &draws[0];
    for other in &draws[1..] {
        for t in tuples {
            let best = other
                .0
                .iter()
                .map(|u| tuple_dist(t, u))
                .fold(f64::INFINITY, f64::min);
            if best > match_tol {
                return Err(GaudinError::NonDiagonalizable(format!(
                    "cross-validation failed: eigen-tuple disagrees between draws by {best:.3e}"
                )));
            }
        }
    }

    // Order by lexicographic comparison of the tuples.
    let mut idx: Vec<usize> = (0..tuples.len()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&tuples[a], &tuples[b]));

    let eigenvalues: Vec<Vec<Complex64>> = idx.iter().map(|&k| tuples[k].clone()).collect();
    let eigenvectors: Vec<Vec<Complex64>> = idx.iter().map(|&k| vectors[k].clone()).collect();
    let multiplicities: Vec<usize> = idx.iter().map(|&k| mults[k]).collect();

    let residuals: Vec<f64> = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(mu, v)| {
            (0..sites)
                .map(|i| {
                    let gv = mats.g[i].mul_vec(v);
                    let mut r = gv;
                    for (x, y) in r.iter_mut().zip(v) {
                        *x -= mu[i] * y;
                    }
                    cvec_norm(&r)
                })
                .fold(0.0, f64::max)
        })
        .collect();

    let mut min_gap = f64::INFINITY;
    for i in 0..eigenvalues.len() {
        for j in (i + 1)..eigenvalues.len() {
            min_gap = min_gap.min(tuple_dist(&eigenvalues[i], &eigenvalues[j]));
        }
    }

    Ok(JointSpectrum {
        eigenvalues,
        eigenvectors,
        multiplicities,
        residuals,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repspace::weight_sector;
    use crate::scalar::{c64, q};
    use num::BigRational;

    fn fixture_111() -> GaudinConfig<BigRational> {
        GaudinConfig::new(
            vec![q(0, 1), q(1, 1), q(2, 1)],
            vec![q(1, 1), q(1, 1), q(1, 1), q(1, 1)],
            1,
        )
        .unwrap()
    }

    #[test]
    fn mu_zero_fixture() {
        let cfg = fixture_111();
        assert_eq!(mu_zero(&cfg, 0), q(-3, 4));
    }

    #[test]
    fn exact_commutators_and_sum_rules() {
        // V_2^{⊗3}, n = 2, exact rational arithmetic.
        let cfg = GaudinConfig::new(
            vec![q(0, 1), q(1, 1), q(2, 1)],
            vec![q(2, 1), q(2, 1), q(2, 1), q(2, 1)],
            2,
        )
        .unwrap();
        let sector = weight_sector(&cfg);
        let mats = gaudin_matrices(&cfg, &sector);
        assert_eq!(commutator_residual(&mats), 0.0);
        let (r1, r2) = sum_rule_residuals(&cfg, &mats);
        assert_eq!(r1, 0.0);
        assert_eq!(r2, 0.0);
    }

    #[test]
    fn joint_spectrum_fixture() {
        let cfg = fixture_111().to_c64_config();
        let sector = weight_sector(&cfg);
        let mats = gaudin_matrices(&cfg, &sector);
        let spec = joint_diagonalize(&mats, 1e-10).unwrap();
        assert_eq!(spec.eigenvalues.len(), 2);
        // Frozen: μ^+ = (3/4 − √3/2, √3, −3/4 − √3/2) (lex-first), then the
        // sign-reversed tuple.
        let s3 = 3.0f64.sqrt();
        let plus = [0.75 - s3 / 2.0, s3, -0.75 - s3 / 2.0];
        let minus = [0.75 + s3 / 2.0, -s3, -0.75 + s3 / 2.0];
        for (k, expect) in [plus, minus].iter().enumerate() {
            for (mu, e) in spec.eigenvalues[k].iter().zip(expect) {
                assert!((mu - c64(*e, 0.0)).norm() < 1e-9, "tuple {k}: {mu} vs {e}");
            }
        }
        assert!(spec.residuals.iter().all(|&r| r < 1e-9));
        assert!(spec.min_gap > 1.0);
        assert_eq!(spec.multiplicities, vec![1, 1]);
    }

    #[test]
    fn n_zero_single_tuple() {
        let cfg = GaudinConfig::new(
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)],
            vec![
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(3.0, 0.0),
            ],
            0,
        )
        .unwrap();
        let sector = weight_sector(&cfg);
        assert_eq!(sector.dim(), 1);
        let mats = gaudin_matrices(&cfg, &sector);
        let spec = joint_diagonalize(&mats, 1e-10).unwrap();
        assert_eq!(spec.eigenvalues.len(), 1);
        for (i, mu) in spec.eigenvalues[0].iter().enumerate() {
            assert!((mu - mu_zero(&cfg, i).to_c64()).norm() < 1e-12);
        }
    }

    #[test]
    fn resonant_config_jordan_detected() {
        // Σλ_i = 0 and Σλ_i t_i = 0: the family has a Jordan block.
        let cfg = GaudinConfig::new(
            vec![c64(1.0, 0.0), c64(3.0, 0.0), c64(2.0, 0.0)],
            vec![
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(-2.0, 0.0),
                c64(-2.0, 0.0),
            ],
            1,
        )
        .unwrap();
        let sector = weight_sector(&cfg);
        assert_eq!(sector.dim(), 2);
        let mats = gaudin_matrices(&cfg, &sector);
        match joint_diagonalize(&mats, 1e-10) {
            Err(GaudinError::NonDiagonalizable(msg)) => {
                assert!(msg.contains("Jordan"), "message: {msg}");
            }
            other => panic!("expected NonDiagonalizable, got {other:?}"),
        }
    }

    #[test]
    fn float_commutators_small() {
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
        let sector = weight_sector(&cfg);
        let mats = gaudin_matrices(&cfg, &sector);
        assert!(commutator_residual(&mats) < 1e-12);
        let (r1, r2) = sum_rule_residuals(&cfg, &mats);
        assert!(r1 < 1e-12);
        assert!(r2 < 1e-11);
    }
}

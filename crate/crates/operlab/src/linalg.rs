//! Dense linear algebra over an arbitrary [`Scalar`](crate::scalar::Scalar):
//! row reduction, kernels, linear solves, and least squares, plus a complex
//! eigensolver (Schur + singular vectors via nalgebra) and a small 2x2
//! complex matrix type used by the monodromy code.

use crate::scalar::Scalar;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Mat {
            nrows,
            ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[T]) -> Self {
        Mat {
            nrows: v.len(),
            ncols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self.at(j, i).clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self.at(j, i).conjugate())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let t = a.clone() * rhs.at(k, j).clone();
                    *out.at_mut(i, j) = out.at(i, j).clone() + t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.ncols {
                    acc = acc + self.at(i, j).clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Mat::from_fn(self.nrows, self.ncols, |i, j| {
            self.at(i, j).clone() + rhs.at(i, j).clone()
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Mat::from_fn(self.nrows, self.ncols, |i, j| {
            self.at(i, j).clone() - rhs.at(i, j).clone()
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat::from_fn(self.nrows, self.ncols, |i, j| {
            self.at(i, j).clone() * s.clone()
        })
    }

    /// Frobenius norm (via `magnitude`, so exact scalars are measured in f64).
    pub fn fro_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| {
                let m = x.magnitude();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    /// In-place reduced row echelon form with partial pivoting by magnitude.
    /// Returns the pivot columns. Entries below `tol` (in magnitude) are
    /// treated as zero for floating scalars; exact scalars use exact zero.
    pub fn rref_in_place(&mut self, tol: f64) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.ncols {
            if r >= self.nrows {
                break;
            }
            // Find best pivot in column c at or below row r.
            let mut best = r;
            let mut best_mag = self.at(r, c).magnitude();
            for i in (r + 1)..self.nrows {
                let m = self.at(i, c).magnitude();
                if m > best_mag {
                    best = i;
                    best_mag = m;
                }
            }
            if self.at(best, c).is_negligible(tol) {
                continue;
            }
            self.swap_rows(r, best);
            let inv = Scalar::recip(self.at(r, c));
            for j in c..self.ncols {
                let v = self.at(r, j).clone() * inv.clone();
                *self.at_mut(r, j) = v;
            }
            for i in 0..self.nrows {
                if i == r || self.at(i, c).is_zero() {
                    continue;
                }
                let factor = self.at(i, c).clone();
                for j in c..self.ncols {
                    let v = self.at(i, j).clone() - factor.clone() * self.at(r, j).clone();
                    *self.at_mut(i, j) = v;
                }
                // Force exact zero in the eliminated position.
                *self.at_mut(i, c) = T::zero();
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        let mut m = self.clone();
        m.rref_in_place(tol).len()
    }

    /// Basis of the right null space, one `Vec<T>` per basis vector.
    pub fn kernel(&self, tol: f64) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place(tol);
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![T::zero(); self.ncols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = T::zero() - m.at(r, f).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * x = rhs` (square, nonsingular). Returns `None` when the
    /// matrix is singular at tolerance `tol`.
    pub fn solve(&self, rhs: &Mat<T>, tol: f64) -> Option<Mat<T>> {
        assert_eq!(self.nrows, self.ncols, "solve requires a square matrix");
        assert_eq!(self.nrows, rhs.nrows);
        let n = self.nrows;
        let mut aug = Mat::zeros(n, n + rhs.ncols);
        for i in 0..n {
            for j in 0..n {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            for j in 0..rhs.ncols {
                *aug.at_mut(i, n + j) = rhs.at(i, j).clone();
            }
        }
        let pivots = aug.rref_in_place(tol);
        if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut x = Mat::zeros(n, rhs.ncols);
        for i in 0..n {
            for j in 0..rhs.ncols {
                *x.at_mut(i, j) = aug.at(i, n + j).clone();
            }
        }
        Some(x)
    }

    /// Least-squares solution of `self * x = rhs` via the normal equations
    /// `Aᴴ A x = Aᴴ rhs`. Suitable for the small well-conditioned systems
    /// used here. Exact scalars get the exact minimum-norm-residual solution
    /// when `AᴴA` is invertible.
    pub fn solve_lstsq(&self, rhs: &Mat<T>, tol: f64) -> Option<Mat<T>> {
        let ah = self.conj_transpose();
        let ata = ah.matmul(self);
        let atb = ah.matmul(rhs);
        ata.solve(&atb, tol)
    }
}

// ---------------------------------------------------------------------------
// Complex-specific dense operations (eigenvalues / eigenvectors / SVD).
// ---------------------------------------------------------------------------

pub type CMat = Mat<Complex64>;

impl Mat<Complex64> {
    pub fn to_na(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| *self.at(i, j))
    }

    pub fn from_na(m: &DMatrix<Complex64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// All eigenvalues via complex Schur decomposition.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        assert_eq!(self.nrows, self.ncols);
        if self.nrows == 0 {
            return Vec::new();
        }
        if self.nrows == 1 {
            return vec![*self.at(0, 0)];
        }
        let na = self.to_na();
        let schur = na.schur();
        let t = schur.unpack().1;
        (0..self.nrows).map(|i| t[(i, i)]).collect()
    }

    /// Unit-norm right eigenvector for an approximate eigenvalue `lambda`:
    /// the right singular vector of `A - lambda I` with smallest singular
    /// value. Also returns that singular value as a quality measure.
    pub fn eigenvector_for(&self, lambda: Complex64) -> (Vec<Complex64>, f64) {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut shifted = self.to_na();
        for i in 0..n {
            shifted[(i, i)] -= lambda;
        }
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut min_idx = 0;
        let mut min_sv = f64::INFINITY;
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s < min_sv {
                min_sv = *s;
                min_idx = k;
            }
        }
        let v: Vec<Complex64> = (0..n).map(|j| vt[(min_idx, j)].conj()).collect();
        (v, min_sv)
    }

    /// Singular values (descending).
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = self.to_na().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Right singular vector belonging to the smallest singular value,
    /// together with that singular value.
    pub fn smallest_singular_pair(&self) -> (Vec<Complex64>, f64) {
        let svd = self.to_na().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut min_idx = 0;
        let mut min_sv = f64::INFINITY;
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s < min_sv {
                min_sv = *s;
                min_idx = k;
            }
        }
        let v: Vec<Complex64> = (0..self.ncols).map(|j| vt[(min_idx, j)].conj()).collect();
        (v, min_sv)
    }
}

// ---------------------------------------------------------------------------
// Complex vector helpers.
// ---------------------------------------------------------------------------

pub fn cvec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn cvec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cvec_axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn cvec_scale(alpha: Complex64, x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn cvec_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

// ---------------------------------------------------------------------------
// 2x2 complex matrices for monodromy work.
// ---------------------------------------------------------------------------

/// A 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct M2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl M2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        M2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        M2::new(
            Complex64::one(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::one(),
        )
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn mul(&self, rhs: &M2) -> M2 {
        M2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    pub fn inverse(&self) -> M2 {
        let det = self.det();
        M2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn scale(&self, s: Complex64) -> M2 {
        M2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn sub(&self, rhs: &M2) -> M2 {
        M2::new(
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }

    pub fn add(&self, rhs: &M2) -> M2 {
        M2::new(
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }

    pub fn neg(&self) -> M2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a * v[0] + self.b * v[1],
            self.c * v[0] + self.d * v[1],
        ]
    }

    /// Distance to the identity.
    pub fn dist_identity(&self) -> f64 {
        self.sub(&M2::identity()).norm()
    }

    pub fn conj_transpose(&self) -> M2 {
        M2::new(
            self.a.conj(),
            self.c.conj(),
            self.b.conj(),
            self.d.conj(),
        )
    }

    /// Normalise to determinant one, choosing the square-root branch that
    /// keeps the matrix closest to `+/- Id` symmetric behaviour: we divide by
    /// the principal square root of the determinant.
    pub fn det_normalized(&self) -> M2 {
        let s = self.det().sqrt();
        self.scale(Complex64::one() / s)
    }

    /// Eigenvalues.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let t = self.trace();
        let d = self.det();
        let disc = (t * t - 4.0 * d).sqrt();
        [(t + disc) / 2.0, (t - disc) / 2.0]
    }

    /// Eigenvector candidates: unit-norm right eigenvectors for each
    /// eigenvalue (possibly equal for repeated eigenvalues).
    pub fn eigenvectors(&self) -> Vec<[Complex64; 2]> {
        let mut out = Vec::new();
        for lam in self.eigenvalues() {
            // (A - lam) v = 0. Rows are (a-lam, b), (c, d-lam); pick the row
            // with the larger norm for stability.
            let r1 = [self.a - lam, self.b];
            let r2 = [self.c, self.d - lam];
            let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
            let n2 = r2[0].norm_sqr() + r2[1].norm_sqr();
            let row = if n1 >= n2 { r1 } else { r2 };
            let v = if row[0].norm() >= row[1].norm() && row[0].norm() > 0.0 {
                [-row[1] / row[0], Complex64::one()]
            } else if row[1].norm() > 0.0 {
                [Complex64::one(), -row[0] / row[1]]
            } else {
                // Matrix is lam * Id: every vector works.
                [Complex64::one(), Complex64::zero()]
            };
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            out.push([v[0] / n, v[1] / n]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, q};
    use num::BigRational;

    #[test]
    fn rational_rref_kernel() {
        // Kernel of [1 1 1] in Q^3 has dimension 2 and exact entries.
        let m = Mat::from_rows(vec![vec![q(1, 1), q(1, 1), q(1, 1)]]);
        let ker = m.kernel(0.0);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let s: BigRational = v.iter().cloned().fold(q(0, 1), |a, b| a + b);
            assert_eq!(s, q(0, 1));
        }
    }

    #[test]
    fn rational_solve_exact() {
        let a = Mat::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]]);
        let b = Mat::col_vec(&[q(5, 1), q(10, 1)]);
        let x = a.solve(&b, 0.0).unwrap();
        assert_eq!(*x.at(0, 0), q(1, 1));
        assert_eq!(*x.at(1, 0), q(3, 1));
    }

    #[test]
    fn complex_solve_and_lstsq() {
        let a = Mat::from_rows(vec![
            vec![c64(1.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, -1.0), c64(2.0, 0.0)],
        ]);
        let b = Mat::col_vec(&[c64(1.0, 1.0), c64(0.0, 0.0)]);
        let x = a.solve(&b, 1e-14).unwrap();
        let r = a.matmul(&x).sub(&b);
        assert!(r.fro_norm() < 1e-12);

        // Overdetermined consistent system.
        let a2 = Mat::from_rows(vec![
            vec![c64(1.0, 0.0)],
            vec![c64(2.0, 0.0)],
        ]);
        let b2 = Mat::col_vec(&[c64(3.0, 0.0), c64(6.0, 0.0)]);
        let x2 = a2.solve_lstsq(&b2, 1e-14).unwrap();
        assert!((x2.at(0, 0) - c64(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_eigen() {
        // Companion-type matrix with spectrum {1, 2, 3}.
        let a = Mat::from_rows(vec![
            vec![c64(6.0, 0.0), c64(-11.0, 0.0), c64(6.0, 0.0)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        ]);
        let mut ev: Vec<f64> = a.eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-10);
        assert!((ev[1] - 2.0).abs() < 1e-10);
        assert!((ev[2] - 3.0).abs() < 1e-10);
        let (v, sv) = a.eigenvector_for(c64(2.0, 0.0));
        assert!(sv < 1e-10);
        let av = a.mul_vec(&v);
        let r: f64 = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - 2.0 * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(r < 1e-10);
    }

    #[test]
    fn m2_algebra() {
        let m = M2::new(c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0));
        let id = m.mul(&m.inverse());
        assert!(id.dist_identity() < 1e-14);
        assert!((m.det() - c64(-2.0, 0.0)).norm() < 1e-14);
        let n = m.det_normalized();
        assert!((n.det() - c64(1.0, 0.0)).norm() < 1e-12);
        let evs = m.eigenvalues();
        let sum = evs[0] + evs[1];
        assert!((sum - m.trace()).norm() < 1e-12);
        for (lam, v) in m.eigenvalues().iter().zip(m.eigenvectors()) {
            let mv = m.mul_vec(v);
            let r = ((mv[0] - lam * v[0]).norm_sqr() + (mv[1] - lam * v[1]).norm_sqr()).sqrt();
            assert!(r < 1e-12, "eigenvector residual {r}");
        }
    }
}

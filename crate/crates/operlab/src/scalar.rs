//! A minimal scalar abstraction so the same dense linear algebra and
//! polynomial code can run either in exact rational arithmetic or in complex
//! floating point.
//!
//! Two implementations are provided:
//!
//! * [`num::BigRational`] — exact arithmetic, used for weight-sector bases,
//!   chiral Hecke operators, and exact Baxter-operator identities;
//! * [`num_complex::Complex64`] — double-precision complex arithmetic, used
//!   everywhere spectra, quadrature, and ODE integration are involved.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field scalar usable by the generic matrix / polynomial routines.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this type is exact (so "zero" tests are exact).
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Conversion from an exact rational (lossless for exact scalars).
    fn from_rational(r: &BigRational) -> Self;

    /// Absolute value as `f64`, used for pivot selection and tolerances.
    fn magnitude(&self) -> f64;

    /// Complex conjugate (identity on rationals).
    fn conjugate(&self) -> Self;

    /// Lossy conversion to `Complex64` for reporting.
    fn to_c64(&self) -> Complex64;

    /// Whether this entry should be treated as zero at tolerance `tol`.
    ///
    /// Exact scalars ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }

    fn conjugate(&self) -> Self {
        self.clone()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn conjugate(&self) -> Self {
        self.conj()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Convenience constructor for complex numbers.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Exact rational from an `i64` pair.
pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_basics() {
        let a = q(1, 3);
        let b = q(1, 6);
        assert_eq!(a.clone() + b.clone(), q(1, 2));
        assert_eq!(a.clone() * b.clone(), q(1, 18));
        assert!(BigRational::EXACT);
        assert!((a.magnitude() - 1.0 / 3.0).abs() < 1e-15);
        assert!(q(0, 5).is_negligible(0.0));
        assert!(!q(1, 1_000_000_000).is_negligible(0.5));
    }

    #[test]
    fn complex_basics() {
        let z = c64(3.0, 4.0);
        assert!((z.magnitude() - 5.0).abs() < 1e-15);
        assert_eq!(z.conjugate(), c64(3.0, -4.0));
        assert!(c64(1e-12, 0.0).is_negligible(1e-10));
        assert_eq!(Complex64::from_ratio(1, 4), c64(0.25, 0.0));
    }

    #[test]
    fn recip_roundtrip() {
        let a = q(7, 5);
        assert_eq!(a.clone() * Scalar::recip(&a), q(1, 1));
        let z = c64(2.0, -1.0);
        assert!((z * Scalar::recip(&z) - c64(1.0, 0.0)).norm() < 1e-15);
    }
}

//! Scalar fields used by the form-algebra layer.
//!
//! Two configurations are supported: double-precision complex numbers (the
//! default, required wherever an exponential appears) and exact Gaussian
//! rationals, used when structure constants and matrix entries are exact and
//! no transcendental operation is involved.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Double-precision complex scalar.
pub type C64 = Complex64;

/// Exact complex scalar with rational real and imaginary parts.
pub type ExactComplex = Complex<BigRational>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Whether equality tests are exact for this scalar type.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_c64(&self) -> C64;

    /// Size estimate used for pivot selection.
    fn magnitude(&self) -> f64;

    /// Zero test; exact types ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Multiplicative inverse. Callers must not pass zero.
    fn recip(&self) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }

    fn one() -> Self {
        C64::new(1.0, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn recip(&self) -> Self {
        self.inv()
    }

    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
}

impl Scalar for ExactComplex {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }

    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn magnitude(&self) -> f64 {
        (self.re.abs() + self.im.abs()).to_f64().unwrap_or(f64::INFINITY)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn recip(&self) -> Self {
        self.inv()
    }
}

/// Exact complex number from a pair of rationals.
pub fn exact(re: BigRational, im: BigRational) -> ExactComplex {
    Complex::new(re, im)
}

/// Exact complex integer.
pub fn exact_int(re: i64, im: i64) -> ExactComplex {
    Complex::new(
        BigRational::from_integer(re.into()),
        BigRational::from_integer(im.into()),
    )
}

/// Real part `n/d` as an exact scalar.
pub fn exact_ratio(n: i64, d: i64) -> ExactComplex {
    Complex::new(
        BigRational::new(n.into(), d.into()),
        BigRational::zero(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_recip_round_trips() {
        let z = exact_int(3, -4);
        let w = z.clone() * Scalar::recip(&z);
        assert_eq!(w, <ExactComplex as Scalar>::one());
        assert!((z.to_c64() - C64::new(3.0, -4.0)).norm() < 1e-15);
    }

    #[test]
    fn negligible_respects_exactness() {
        assert!(C64::new(1e-12, 0.0).is_negligible(1e-9));
        assert!(!exact_ratio(1, 1_000_000_000_000).is_negligible(1.0));
    }
}

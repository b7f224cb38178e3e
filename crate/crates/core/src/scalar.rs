//! Complex scalar abstraction: binary64 complex numbers for numerics and
//! Gaussian rationals for exact identity verification.
//!
//! Every identity the library checks (Jacobi, d² = 0, ∂∂̄ω = 0, the
//! closed-form Bismut-Ricci expression) is polynomial or rational in the
//! structure-constant inputs, so when those inputs are rational the check can
//! be carried out exactly.  `f64` inputs are dyadic rationals and convert to
//! [`CExact`] without loss.

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Complex double precision, the default scalar.
pub type C64 = Complex<f64>;

/// Exact Gaussian rational: a + b√−1 with a, b ∈ ℚ.
pub type CExact = Complex<BigRational>;

/// Field operations shared by [`C64`] and [`CExact`].
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// The imaginary unit.
    fn i() -> Self;

    fn conj(&self) -> Self;

    /// Modulus, approximated through f64 for exact scalars.
    fn abs_f64(&self) -> f64;

    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;

    /// Builds a scalar from f64 parts.  Exact scalars keep the dyadic value
    /// of the input bit for bit.
    fn from_parts(re: f64, im: f64) -> Self;

    fn from_re(re: f64) -> Self {
        Self::from_parts(re, 0.0)
    }

    /// Coefficients with modulus at or below this threshold are dropped from
    /// sparse form representations after each arithmetic pass.
    fn prune_eps() -> f64;
}

impl Scalar for C64 {
    fn i() -> Self {
        C64::new(0.0, 1.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn abs_f64(&self) -> f64 {
        self.norm()
    }

    fn re_f64(&self) -> f64 {
        self.re
    }

    fn im_f64(&self) -> f64 {
        self.im
    }

    fn from_parts(re: f64, im: f64) -> Self {
        C64::new(re, im)
    }

    fn prune_eps() -> f64 {
        1e-14
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float expected")
}

impl Scalar for CExact {
    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn abs_f64(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }

    fn re_f64(&self) -> f64 {
        self.re.to_f64().unwrap_or(f64::INFINITY)
    }

    fn im_f64(&self) -> f64 {
        self.im.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(rational(re), rational(im))
    }

    fn prune_eps() -> f64 {
        0.0
    }
}

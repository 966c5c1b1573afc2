//! Scalar abstraction, so one implementation of each formula serves exact
//! rational checks as well as floating-point and dual-number evaluation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field-like scalar used by every algebraic routine in the crate.
///
/// Implemented for `f64` (solver path), [`BigRational`] (zero-tolerance
/// identity checks) and [`Dual`] (exact first derivatives of smooth fields).
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    /// Lossy projection onto `f64`, used for reporting and guards.
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// `(-1)^e` as a scalar.
    fn sign(e: usize) -> Self {
        if e % 2 == 0 {
            Self::one()
        } else {
            -Self::one()
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    /// Square roots are not closed over the rationals; this returns the
    /// nearest double converted back, so exact code paths never call it.
    fn sqrt(&self) -> Self {
        <Self as Scalar>::from_f64(Scalar::to_f64(self).sqrt())
    }
    fn abs_f64(&self) -> f64 {
        Scalar::to_f64(&self.abs())
    }
}

/// First-order dual number `re + eps * du` with `eps^2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub du: f64,
}

impl Dual {
    pub fn new(re: f64, du: f64) -> Self {
        Self { re, du }
    }

    pub fn constant(re: f64) -> Self {
        Self { re, du: 0.0 }
    }

    pub fn variable(re: f64) -> Self {
        Self { re, du: 1.0 }
    }

    pub fn sin(self) -> Self {
        Self::new(self.re.sin(), self.du * self.re.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.re.cos(), -self.du * self.re.sin())
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.du + o.du)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.du - o.du)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.re / o.re;
        Dual::new(q, (self.du - q * o.du) / o.re)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.du)
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.du == 0.0
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Scalar for Dual {
    fn from_f64(x: f64) -> Self {
        Dual::constant(x)
    }
    fn from_i64(x: i64) -> Self {
        Dual::constant(x as f64)
    }
    fn to_f64(&self) -> f64 {
        self.re
    }
    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.du / (2.0 * s))
    }
}

/// Convenience constructor for exact rationals `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_and_quotient_rules() {
        let x = Dual::variable(3.0);
        let y = x * x / (x + Dual::constant(1.0));
        // d/dx x^2/(x+1) = (x^2 + 2x)/(x+1)^2
        assert!((y.du - 15.0 / 16.0).abs() < 1e-15);
        let s = Dual::variable(4.0).sqrt();
        assert_eq!(s, Dual::new(2.0, 0.25));
    }

    #[test]
    fn rational_sign_and_conversion() {
        assert_eq!(<BigRational as Scalar>::sign(3), ratio(-1, 1));
        assert_eq!(Scalar::to_f64(&ratio(1, 4)), 0.25);
    }
}

//! Exact complex scalars: pairs of arbitrary-precision rationals.
//!
//! The contact-order machinery decides "vanishes identically" questions, so its
//! arithmetic must be exact. Everything here is a thin layer over
//! `num_rational::BigRational` with the complex product/conjugation rules.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A Gaussian rational: re + im·i with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GRat { re, im }
    }

    pub fn zero() -> Self {
        GRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        GRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        assert!(re_den != 0 && im_den != 0, "zero denominator");
        GRat::new(
            BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    /// Multiplicative inverse; None for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GRat::new(&self.re / &norm, -(&self.im / &norm)))
    }

    /// Sign of the real part when the value is real: Some(+1/0/-1), None if not real.
    pub fn real_sign(&self) -> Option<i8> {
        if !self.im.is_zero() {
            return None;
        }
        Some(if self.re.is_zero() {
            0
        } else if self.re.is_positive() {
            1
        } else {
            -1
        })
    }
}

impl fmt::Debug for GRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{}{}i)", self.re, if self.im.is_negative() { "" } else { "+" }, self.im)
        }
    }
}

impl Add for GRat {
    type Output = GRat;
    fn add(self, rhs: GRat) -> GRat {
        GRat::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for GRat {
    fn add_assign(&mut self, rhs: GRat) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for GRat {
    type Output = GRat;
    fn sub(self, rhs: GRat) -> GRat {
        GRat::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for GRat {
    type Output = GRat;
    fn neg(self) -> GRat {
        GRat::new(-self.re, -self.im)
    }
}

impl Mul for GRat {
    type Output = GRat;
    fn mul(self, rhs: GRat) -> GRat {
        &self * &rhs
    }
}

impl Mul for &GRat {
    type Output = GRat;
    fn mul(self, rhs: &GRat) -> GRat {
        GRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

/// Rational -> f64 via big-integer division with 80 bits of scaling headroom.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Out-of-range components: scale down by a common power of two first.
    let bits = q.numer().bits().max(q.denom().bits()) as i64;
    let shift = (bits - 900).max(0) as u64;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Best rational approximation of `x` by continued fractions, with denominator
/// capped at `max_den`. Exact for inputs that already are small-denominator
/// rationals (up to f64 representation).
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    assert!(x.is_finite());
    let negative = x < 0.0;
    let mut x = x.abs();
    // Convergents p/q of the continued-fraction expansion.
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::from(0), BigInt::from(1), BigInt::from(1), BigInt::from(0));
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i128);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let mut r = BigRational::new(p1, q1);
    if negative {
        r = -r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_product_follows_i_squared_rule() {
        let i = GRat::from_parts(0, 1, 1, 1);
        let sq = &i * &i;
        assert_eq!(sq, GRat::from_int(-1));
    }

    #[test]
    fn conjugation_is_involutive_and_multiplicative() {
        let a = GRat::from_parts(3, 4, -2, 5);
        let b = GRat::from_parts(-1, 2, 7, 3);
        assert_eq!(a.conj().conj(), a);
        assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1_000_000), BigRational::new(1.into(), 2.into()));
        assert_eq!(rationalize(-2.0 / 3.0, 1_000_000), BigRational::new((-2).into(), 3.into()));
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let r = rationalize(phi, 1_000_000);
        assert!(r.denom() <= &BigInt::from(1_000_000u64));
        assert!((rational_to_f64(&r) - phi).abs() < 1e-11);
    }

    #[test]
    fn to_f64_handles_huge_components() {
        let big = BigInt::from(10u8).pow(400);
        let q = BigRational::new(big.clone(), &big * BigInt::from(2u8));
        assert_eq!(rational_to_f64(&q), 0.5);
    }
}

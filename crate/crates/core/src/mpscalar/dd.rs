//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of two
//! non-overlapping doubles, giving roughly 106 bits of mantissa.
//!
//! Addition and multiplication follow the accurate double-word algorithms
//! (two `two_sum`s for addition, one `two_prod` plus two FMAs for
//! multiplication); both stay within 2 ulp of 106-bit arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::eft::{quick_two_sum, two_prod, two_sum};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Builds a value from an arbitrary pair, renormalizing it.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self::finish(hi, lo)
    }

    /// Builds a value from a pair that is already normalized.
    ///
    /// Callers must guarantee `fl(hi + lo) == hi`.
    #[inline]
    pub const fn from_parts_unchecked(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// `fl(hi + lo) == hi`, the normalization invariant.
    pub fn is_normalized(self) -> bool {
        self.hi + self.lo == self.hi
    }

    pub fn abs(self) -> Self {
        if self.hi.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    #[inline(always)]
    fn finish(hi: f64, lo: f64) -> Self {
        if hi.is_finite() {
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn from_product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self::finish(p, e)
    }

    /// Exact sum of two doubles.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, b);
        Self::finish(s, e)
    }

    #[inline]
    pub fn mul_f64(self, y: f64) -> Self {
        let (ch, cl1) = two_prod(self.hi, y);
        if !ch.is_finite() {
            return Self::finish(ch, 0.0);
        }
        let cl3 = self.lo.mul_add(y, cl1);
        let (hi, lo) = quick_two_sum(ch, cl3);
        Self::finish(hi, lo)
    }

    #[inline]
    pub fn add_f64(self, y: f64) -> Self {
        let (sh, sl) = two_sum(self.hi, y);
        if !sh.is_finite() {
            return Self::finish(sh, 0.0);
        }
        let v = self.lo + sl;
        let (hi, lo) = quick_two_sum(sh, v);
        Self::finish(hi, lo)
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// Square root; negative input yields NaN.
    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if !self.hi.is_finite() {
            return self;
        }
        // One Newton step on the double approximation.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let residual = self - Self::from_product(ax, ax);
        Self::from_sum(ax, residual.hi * (x * 0.5))
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    #[inline(always)]
    fn add(self, b: Self) -> Self {
        let (sh, sl) = two_sum(self.hi, b.hi);
        if !sh.is_finite() {
            return Self::finish(sh, 0.0);
        }
        let (th, tl) = two_sum(self.lo, b.lo);
        let c = sl + th;
        let (vh, vl) = quick_two_sum(sh, c);
        let w = tl + vl;
        let (hi, lo) = quick_two_sum(vh, w);
        Self::finish(hi, lo)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    #[inline(always)]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    #[inline(always)]
    fn mul(self, b: Self) -> Self {
        let (ch, cl1) = two_prod(self.hi, b.hi);
        if !ch.is_finite() {
            return Self::finish(ch, 0.0);
        }
        let tl0 = self.lo * b.lo;
        let tl1 = self.hi.mul_add(b.lo, tl0);
        let cl2 = self.lo.mul_add(b.hi, tl1);
        let cl3 = cl1 + cl2;
        let (hi, lo) = quick_two_sum(ch, cl3);
        Self::finish(hi, lo)
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    #[inline(always)]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl AddAssign for DoubleDouble {
    #[inline(always)]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    #[inline(always)]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for DoubleDouble {
    #[inline(always)]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

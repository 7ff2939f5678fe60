//! Quad-double arithmetic: four non-overlapping doubles in descending
//! magnitude, roughly 212 bits of mantissa.
//!
//! Addition merges the eight components by magnitude before accumulating, so
//! it stays accurate under cancellation. Multiplication keeps every partial
//! product down to third order and renormalizes the five-term result.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::dd::DoubleDouble;
use super::eft::{quick_two_sum, two_prod, two_sum};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct QuadDouble([f64; 4]);

#[inline(always)]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline(always)]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

/// Adds `c` into the double-length accumulator `(a, b)`. Returns a finished
/// component when both accumulator words stay nonzero, otherwise 0.
#[inline(always)]
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, nb) = two_sum(*b, c);
    let (s, na) = two_sum(*a, s);
    *a = na;
    *b = nb;
    let za = *a != 0.0;
    let zb = *b != 0.0;
    if za && zb {
        return s;
    }
    if !zb {
        *b = *a;
    }
    *a = s;
    0.0
}

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, 0.0, 0.0, 0.0];
    }
    let (s0, c3) = quick_two_sum(c2, c3);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
        }
    }
    [s0, s1, s2, s3]
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, 0.0, 0.0, 0.0];
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                (s2, s3) = quick_two_sum(s2, c4);
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    [s0, s1, s2, s3]
}

impl QuadDouble {
    pub const ZERO: Self = Self([0.0; 4]);
    pub const ONE: Self = Self([1.0, 0.0, 0.0, 0.0]);

    /// Builds a value from four arbitrary doubles, renormalizing them.
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        let (s, e) = two_sum(c0, c1);
        let (t, f) = two_sum(c2, c3);
        let (u, g) = two_sum(s, t);
        Self(renorm5(u, e, g, f, 0.0))
    }

    /// Callers must pass non-overlapping components in descending magnitude.
    pub const fn from_components_unchecked(c: [f64; 4]) -> Self {
        Self(c)
    }

    pub const fn from_f64(x: f64) -> Self {
        Self([x, 0.0, 0.0, 0.0])
    }

    pub fn from_dd(x: DoubleDouble) -> Self {
        Self([x.hi(), x.lo(), 0.0, 0.0])
    }

    #[inline]
    pub fn components(self) -> [f64; 4] {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0[0]
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Every adjacent pair satisfies `fl(c_i + c_{i+1}) == c_i`.
    pub fn is_normalized(self) -> bool {
        self.0.windows(2).all(|w| w[0] + w[1] == w[0])
    }

    pub fn abs(self) -> Self {
        if self.0[0].is_sign_negative() {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let a = self.0;
        let (p0, q0) = two_prod(a[0], b);
        if !p0.is_finite() {
            return Self::from_f64(p0);
        }
        let (p1, q1) = two_prod(a[1], b);
        let (p2, q2) = two_prod(a[2], b);
        let p3 = a[3] * b;

        let s0 = p0;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (q1, q2) = three_sum2(q1, q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        Self(renorm5(s0, s1, s2, s3, s4))
    }

    fn mul_pow2(self, b: f64) -> Self {
        Self(self.0.map(|c| c * b))
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// Square root by Newton iteration on the reciprocal square root.
    /// Negative input yields NaN.
    pub fn sqrt(self) -> Self {
        let a0 = self.0[0];
        if a0 == 0.0 {
            return Self::ZERO;
        }
        if a0 < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if !a0.is_finite() {
            return self;
        }
        let mut r = Self::from_f64(1.0 / a0.sqrt());
        let h = self.mul_pow2(0.5);
        let half = Self::from_f64(0.5);
        for _ in 0..3 {
            r += r * (half - h * r * r);
        }
        r * self
    }
}

impl Add for QuadDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let a = self.0;
        let b = b.0;
        let lead = a[0] + b[0];
        if !lead.is_finite() {
            return Self::from_f64(lead);
        }
        // Merge both component lists by decreasing magnitude.
        let (mut i, mut j) = (0usize, 0usize);
        let next = |i: &mut usize, j: &mut usize| -> f64 {
            if *i >= 4 {
                *j += 1;
                b[*j - 1]
            } else if *j >= 4 || a[*i].abs() > b[*j].abs() {
                *i += 1;
                a[*i - 1]
            } else {
                *j += 1;
                b[*j - 1]
            }
        };

        let u = next(&mut i, &mut j);
        let v = next(&mut i, &mut j);
        let (mut u, mut v) = quick_two_sum(u, v);

        let mut x = [0.0f64; 4];
        let mut k = 0;
        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    k += 1;
                    x[k] = v;
                }
                break;
            }
            let t = next(&mut i, &mut j);
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &c in &a[i.min(4)..] {
            x[3] += c;
        }
        for &c in &b[j.min(4)..] {
            x[3] += c;
        }
        Self(renorm4(x[0], x[1], x[2], x[3]))
    }
}

impl Sub for QuadDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for QuadDouble {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self.0;
        let b = b.0;
        let (p0, q0) = two_prod(a[0], b[0]);
        if !p0.is_finite() {
            return Self::from_f64(p0);
        }
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        // First-order terms.
        let (p1, p2, q0) = three_sum(p1, p2, q0);

        // Second-order terms: (p2, q1, q2) + (p3, p4, p5).
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (mut s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;

        // Third-order terms.
        s1 += a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5;

        Self(renorm5(p0, p1, s0, s1, s2))
    }
}

impl Div for QuadDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let b0 = b.0[0];
        let q0 = self.0[0] / b0;
        if !q0.is_finite() {
            return Self::from_f64(q0);
        }
        let mut r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b0;
        r -= b.mul_f64(q1);
        let q2 = r.0[0] / b0;
        r -= b.mul_f64(q2);
        let q3 = r.0[0] / b0;
        r -= b.mul_f64(q3);
        let q4 = r.0[0] / b0;
        Self(renorm5(q0, q1, q2, q3, q4))
    }
}

impl Neg for QuadDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl AddAssign for QuadDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for QuadDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for QuadDouble {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl From<f64> for QuadDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<DoubleDouble> for QuadDouble {
    fn from(x: DoubleDouble) -> Self {
        Self::from_dd(x)
    }
}

impl fmt::Debug for QuadDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "QuadDouble({a:e} + {b:e} + {c:e} + {d:e})")
    }
}

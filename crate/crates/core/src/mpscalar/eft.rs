//! Error-free transformations on native doubles.
//!
//! Each function returns a rounded result together with the exact rounding
//! error, so that `s + e` (or `p + e`) equals the real-number result.

use crate::error::{Error, Result};

/// Knuth's branch-free two-sum: `s = fl(a + b)` and `s + e == a + b` exactly.
#[inline(always)]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Dekker's fast two-sum. Exact only when `|a| >= |b|` (or `a == 0`).
#[inline(always)]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `p = fl(a * b)` and `p + e == a * b` exactly, using a fused multiply-add.
#[inline(always)]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// [`two_sum`] with a range check: non-finite operands or an overflowing sum
/// are reported instead of returning infinities or NaN.
pub fn try_two_sum(a: f64, b: f64) -> Result<(f64, f64)> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::range(format!(
            "two_sum of non-finite operand ({a:e}, {b:e})"
        )));
    }
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return Err(Error::range(format!("two_sum overflow ({a:e} + {b:e})")));
    }
    Ok((s, e))
}

// 2^600 pulls any product out of the subnormal range without overflowing it.
const RESCALE: f64 = f64::from_bits((1023 + 600) << 52);
const UNSCALE: f64 = f64::from_bits((1023 - 600) << 52);
// Below 2^-969 the rounding error of a product may not be representable.
const TINY_PRODUCT: f64 = f64::from_bits((1023 - 969) << 52);

/// [`two_prod`] with a range check. Fails on overflow and on products so
/// small that the error term is not exactly representable.
pub fn try_two_prod(a: f64, b: f64) -> Result<(f64, f64)> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::range(format!(
            "two_prod of non-finite operand ({a:e}, {b:e})"
        )));
    }
    let (p, e) = two_prod(a, b);
    if !p.is_finite() {
        return Err(Error::range(format!("two_prod overflow ({a:e} * {b:e})")));
    }
    if a != 0.0 && b != 0.0 && p.abs() < TINY_PRODUCT {
        // Redo the product away from the subnormal range and check that both
        // parts survive scaling back unchanged.
        let (ps, es) = two_prod(a * RESCALE, b);
        let exact = ps * UNSCALE == p && (es * UNSCALE) * RESCALE == es && es * UNSCALE == e;
        if !exact {
            return Err(Error::range(format!(
                "two_prod underflow: error term of {a:e} * {b:e} is not representable"
            )));
        }
    }
    Ok((p, e))
}

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

/// Fixed-point scale: every double we generate is an integer multiple of
/// `2^-SCALE`.
pub const SCALE: u32 = 1200;

/// Exact value of `x * 2^SCALE` as an integer. Panics if `x` is not a
/// multiple of `2^-SCALE`.
pub fn fixed(x: f64) -> BigInt {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let shift = exp + SCALE as i64;
    assert!(shift >= 0, "value below fixed-point resolution");
    let v = BigInt::from(mant) << shift as usize;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn fixed_sum(parts: &[f64]) -> BigInt {
    parts.iter().map(|&p| fixed(p)).sum()
}

/// `|approx - exact| <= |exact| * 2^-k`, all values at the same scale.
pub fn rel_within(approx: &BigInt, exact: &BigInt, k: u32) -> bool {
    let err: BigInt = (approx - exact).abs() << k as usize;
    err <= exact.abs()
}

/// Random double with a uniformly random sign, 53-bit mantissa and
/// exponent in `[-exp_range, exp_range]`.
pub fn random_f64(rng: &mut impl Rng, exp_range: i32) -> f64 {
    let m = rng.gen_range(1u64 << 52..1u64 << 53) as f64;
    let e = rng.gen_range(-exp_range..=exp_range) - 52;
    let x = m * 2f64.powi(e);
    if rng.gen() {
        -x
    } else {
        x
    }
}

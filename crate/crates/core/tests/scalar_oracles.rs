//! Scalar arithmetic checked against exact integer arithmetic.

mod common;

use common::{fixed, fixed_sum, random_f64, rel_within};
use mpmm::mpscalar::{two_prod, two_sum};
use mpmm::{BigFloat, DoubleDouble, QuadDouble};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn error_free_transforms_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1_000_000u32 {
        let a = random_f64(&mut rng, 60);
        // Mix of comparable and widely separated magnitudes.
        let b = if i % 2 == 0 {
            a * rng.gen_range(-2.0..2.0)
        } else {
            random_f64(&mut rng, 60)
        };
        let (s, e) = two_sum(a, b);
        assert_eq!(
            fixed(s) + fixed(e),
            fixed(a) + fixed(b),
            "two_sum({a:e}, {b:e})"
        );
        let (p, e) = two_prod(a, b);
        // Products of two values scaled by 2^SCALE live at scale 2^(2*SCALE).
        let exact = fixed(a) * fixed(b);
        let got = (fixed(p) + fixed(e)) << common::SCALE as usize;
        assert_eq!(got, exact, "two_prod({a:e}, {b:e})");
    }
}

fn random_dd(rng: &mut ChaCha8Rng) -> DoubleDouble {
    let hi = random_f64(rng, 40);
    let lo = hi * 2f64.powi(-53) * rng.gen_range(-1.0..1.0);
    DoubleDouble::new(hi, lo)
}

fn dd_fixed(x: DoubleDouble) -> BigInt {
    fixed_sum(&[x.hi(), x.lo()])
}

#[test]
fn double_double_add_and_mul_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100_000 {
        let a = random_dd(&mut rng);
        let b = if rng.gen_bool(0.3) {
            // Heavy cancellation.
            -a + DoubleDouble::from_f64(a.hi() * 2f64.powi(-rng.gen_range(1..80)))
        } else {
            random_dd(&mut rng)
        };
        let (fa, fb) = (dd_fixed(a), dd_fixed(b));

        let s = a + b;
        assert!(s.is_normalized());
        assert!(
            rel_within(&dd_fixed(s), &(&fa + &fb), 104),
            "add {a:?} {b:?}"
        );

        let p = a * b;
        assert!(p.is_normalized());
        let exact = &fa * &fb;
        let got = dd_fixed(p) << common::SCALE as usize;
        assert!(rel_within(&got, &exact, 104), "mul {a:?} {b:?}");
    }
}

fn qd_fixed(x: QuadDouble) -> BigInt {
    fixed_sum(&x.components())
}

#[test]
fn quad_double_add_and_mul_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random_qd = |rng: &mut ChaCha8Rng| {
        let c0 = random_f64(rng, 30);
        let mut c = [c0, 0.0, 0.0, 0.0];
        for k in 1..4 {
            c[k] = c[k - 1] * 2f64.powi(-53) * rng.gen_range(-1.0..1.0);
        }
        QuadDouble::new(c[0], c[1], c[2], c[3])
    };
    for _ in 0..20_000 {
        let a = random_qd(&mut rng);
        let b = random_qd(&mut rng);
        let (fa, fb) = (qd_fixed(a), qd_fixed(b));
        let s = a + b;
        let exact = &fa + &fb;
        if exact != BigInt::from(0) {
            assert!(rel_within(&qd_fixed(s), &exact, 200), "add {a:?} {b:?}");
        }
        let p = a * b;
        let got = qd_fixed(p) << common::SCALE as usize;
        assert!(rel_within(&got, &(&fa * &fb), 200), "mul {a:?} {b:?}");
    }
}

/// Exact value of a big-float as an integer at scale `2^SCALE`.
fn big_fixed(x: &BigFloat) -> BigInt {
    let f = x.as_float();
    if f.is_zero() {
        return BigInt::from(0);
    }
    let (m, e) = f.to_integer_exp().expect("finite");
    let m: BigInt = m.to_string().parse().unwrap();
    let shift = e as i64 + common::SCALE as i64;
    assert!(shift >= 0);
    m << shift as usize
}

#[test]
fn arbitrary_precision_ops_round_correctly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..10_000u32 {
        let bits = [64, 128, 256, 1024][i as usize % 4];
        // Sums of three doubles give operands with up to ~160 significant bits.
        let make = |rng: &mut ChaCha8Rng| {
            let x = random_f64(rng, 20);
            let y = x * 2f64.powi(-rng.gen_range(20..60)) * rng.gen_range(-1.0..1.0);
            let z = y * 2f64.powi(-rng.gen_range(20..60)) * rng.gen_range(-1.0..1.0);
            let mut v = BigFloat::from_f64(x, bits + 256);
            v.add_assign_ref(&BigFloat::from_f64(y, bits + 256));
            v.add_assign_ref(&BigFloat::from_f64(z, bits + 256));
            BigFloat::from_float(v.as_float(), bits)
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        let (fa, fb) = (big_fixed(&a), big_fixed(&b));

        let mut s = BigFloat::zero(bits);
        s.set_sum(&a, &b);
        let exact = &fa + &fb;
        if exact != BigInt::from(0) {
            assert!(rel_within(&big_fixed(&s), &exact, bits), "add at {bits}");
        }

        let mut d = BigFloat::zero(bits);
        d.set_difference(&a, &b);
        let exact = &fa - &fb;
        if exact != BigInt::from(0) {
            assert!(rel_within(&big_fixed(&d), &exact, bits), "sub at {bits}");
        }

        let mut p = BigFloat::zero(bits);
        p.set_product(&a, &b);
        let got = big_fixed(&p) << common::SCALE as usize;
        assert!(rel_within(&got, &(&fa * &fb), bits), "mul at {bits}");

        // q ≈ a/b: check |q*b - a| <= |a| * 2^-bits.
        let q = a.div(&b);
        let qb = big_fixed(&q) * &fb;
        let a_scaled = &fa << common::SCALE as usize;
        assert!(rel_within(&qb, &a_scaled, bits), "div at {bits}");
    }
}

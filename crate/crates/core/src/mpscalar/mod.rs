//! Extended-precision scalars.
//!
//! Kernels are generic over [`Scalar`], implemented by [`DoubleDouble`],
//! [`QuadDouble`] and the MPFR-backed [`BigFloat`]. [`ExtendedScalar`] is the
//! dynamically typed value used at API boundaries, where precision is only
//! known at run time and mismatches must be reported rather than assumed away.

mod ap;
mod dd;
pub mod eft;
pub mod hex;
mod qd;

use std::fmt;
use std::str::FromStr;

use rug::Float;

pub use ap::{BigFloat, MAX_BITS as AP_MAX_BITS, MIN_BITS as AP_MIN_BITS};
pub use dd::DoubleDouble;
pub use eft::{quick_two_sum, try_two_prod, try_two_sum, two_prod, two_sum};
pub use qd::QuadDouble;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecisionKind {
    Dd,
    Qd,
    Ap,
}

/// A working precision: double-double, quad-double or an arbitrary mantissa
/// width. `bits` is fixed at 106 / 212 for the native formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrecisionSpec {
    kind: PrecisionKind,
    bits: u32,
}

impl PrecisionSpec {
    pub const DD: Self = Self {
        kind: PrecisionKind::Dd,
        bits: 106,
    };
    pub const QD: Self = Self {
        kind: PrecisionKind::Qd,
        bits: 212,
    };

    pub fn ap(bits: u32) -> Result<Self> {
        if !(AP_MIN_BITS..=AP_MAX_BITS).contains(&bits) {
            return Err(Error::usage(format!(
                "arbitrary precision must be in [{AP_MIN_BITS}, {AP_MAX_BITS}] bits, got {bits}"
            )));
        }
        Ok(Self {
            kind: PrecisionKind::Ap,
            bits,
        })
    }

    pub fn kind(self) -> PrecisionKind {
        self.kind
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Unit roundoff `2^-bits`.
    /// `2^-bits` as a double. Subnormal above 1022 bits and zero above
    /// 1074; compare against [`Self::bits`] directly in that range.
    pub fn unit_roundoff(self) -> f64 {
        0.5f64.powi(self.bits as i32)
    }

    /// Command-line spelling: `dd`, `qd` or `ap:<bits>`.
    pub fn short_name(self) -> String {
        match self.kind {
            PrecisionKind::Dd => "dd".into(),
            PrecisionKind::Qd => "qd".into(),
            PrecisionKind::Ap => format!("ap:{}", self.bits),
        }
    }
}

/// `dd,106`, `qd,212` or `ap,<bits>`.
impl fmt::Display for PrecisionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            PrecisionKind::Dd => "dd",
            PrecisionKind::Qd => "qd",
            PrecisionKind::Ap => "ap",
        };
        write!(f, "{kind},{}", self.bits)
    }
}

/// Accepts `dd`, `qd`, `ap:<bits>` and the `kind,bits` form written by
/// [`Display`](fmt::Display).
impl FromStr for PrecisionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let (kind, bits) = match lower.split_once([',', ':']) {
            Some((k, b)) => {
                let bits = b
                    .parse::<u32>()
                    .map_err(|_| Error::usage(format!("bad precision bits in {s:?}")))?;
                (k.to_string(), Some(bits))
            }
            None => (lower.clone(), None),
        };
        match (kind.as_str(), bits) {
            ("dd", None | Some(106)) => Ok(Self::DD),
            ("qd", None | Some(212)) => Ok(Self::QD),
            ("ap" | "mpfr", Some(bits)) => Self::ap(bits),
            _ => Err(Error::usage(format!(
                "unknown precision {s:?} (expected dd, qd or ap:<bits>)"
            ))),
        }
    }
}

/// Arithmetic needed by the matrix kernels, written in assign-into form so
/// that the big-float backend can reuse its allocations.
pub trait Scalar: Clone + Send + Sync + PartialEq + fmt::Debug + 'static {
    const KIND: PrecisionKind;

    fn zero(prec: PrecisionSpec) -> Self;
    fn from_f64(x: f64, prec: PrecisionSpec) -> Self;
    /// Rounds a big-float into this representation.
    fn from_big(x: &Float, prec: PrecisionSpec) -> Self;
    /// Exact big-float value.
    fn to_big(&self) -> Float;
    fn precision(&self) -> PrecisionSpec;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;

    fn set_zero(&mut self);
    fn add_assign_ref(&mut self, rhs: &Self);
    fn sub_assign_ref(&mut self, rhs: &Self);
    fn set_sum(&mut self, a: &Self, b: &Self);
    fn set_difference(&mut self, a: &Self, b: &Self);
    fn set_product(&mut self, a: &Self, b: &Self);

    /// `self += a * b` with the product rounded before the addition.
    #[inline(always)]
    fn mul_acc(&mut self, a: &Self, b: &Self, scratch: &mut Self) {
        scratch.set_product(a, b);
        self.add_assign_ref(scratch);
    }

    fn div_ref(&self, rhs: &Self) -> Self;
    fn sqrt_ref(&self) -> Self;

    /// Bit-exact text encoding (no whitespace).
    fn to_hex(&self) -> String;
    fn from_hex(s: &str, prec: PrecisionSpec) -> Result<Self>;
}

/// Exact big-float sum of non-overlapping doubles.
fn exact_float_sum(parts: &[f64]) -> Float {
    let exps: Vec<i32> = parts
        .iter()
        .filter(|p| **p != 0.0 && p.is_finite())
        .map(|p| {
            let biased = ((p.to_bits() >> 52) & 0x7ff) as i32;
            biased.max(1) - 1075
        })
        .collect();
    let span = match (exps.iter().max(), exps.iter().min()) {
        (Some(hi), Some(lo)) => (hi - lo) as u32 + 2,
        _ => 0,
    };
    let mut acc = Float::with_val(53 + span, parts[0]);
    for &p in &parts[1..] {
        acc += p;
    }
    acc
}

/// Peels `N` doubles off a big-float, each the nearest double to the
/// remaining residual.
fn split_float<const N: usize>(x: &Float) -> [f64; N] {
    let mut out = [0.0; N];
    let mut residual = x.clone();
    for slot in out.iter_mut() {
        let c = residual.to_f64();
        *slot = c;
        if c == 0.0 || !c.is_finite() {
            break;
        }
        residual -= c;
    }
    out
}

fn parse_components<const N: usize>(s: &str) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    let mut n = 0;
    for (slot, part) in out.iter_mut().zip(s.split(',')) {
        *slot = hex::parse_f64(part)?;
        n += 1;
    }
    if n != N || s.split(',').count() != N {
        return Err(Error::format(
            0,
            format!("expected {N} hex components in {s:?}"),
        ));
    }
    Ok(out)
}

impl Scalar for DoubleDouble {
    const KIND: PrecisionKind = PrecisionKind::Dd;

    #[inline]
    fn zero(_: PrecisionSpec) -> Self {
        DoubleDouble::ZERO
    }

    fn from_f64(x: f64, _: PrecisionSpec) -> Self {
        DoubleDouble::from_f64(x)
    }

    fn from_big(x: &Float, _: PrecisionSpec) -> Self {
        let [hi, lo] = split_float::<2>(x);
        DoubleDouble::from_parts_unchecked(hi, lo)
    }

    fn to_big(&self) -> Float {
        exact_float_sum(&[self.hi(), self.lo()])
    }

    fn precision(&self) -> PrecisionSpec {
        PrecisionSpec::DD
    }

    fn to_f64(&self) -> f64 {
        DoubleDouble::to_f64(*self)
    }

    fn is_finite(&self) -> bool {
        DoubleDouble::is_finite(*self)
    }

    #[inline(always)]
    fn set_zero(&mut self) {
        *self = DoubleDouble::ZERO;
    }

    #[inline(always)]
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += *rhs;
    }

    #[inline(always)]
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= *rhs;
    }

    #[inline(always)]
    fn set_sum(&mut self, a: &Self, b: &Self) {
        *self = *a + *b;
    }

    #[inline(always)]
    fn set_difference(&mut self, a: &Self, b: &Self) {
        *self = *a - *b;
    }

    #[inline(always)]
    fn set_product(&mut self, a: &Self, b: &Self) {
        *self = *a * *b;
    }

    #[inline(always)]
    fn mul_acc(&mut self, a: &Self, b: &Self, _: &mut Self) {
        *self += *a * *b;
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        *self / *rhs
    }

    fn sqrt_ref(&self) -> Self {
        self.sqrt()
    }

    fn to_hex(&self) -> String {
        format!(
            "{},{}",
            hex::format_f64(self.hi()),
            hex::format_f64(self.lo())
        )
    }

    fn from_hex(s: &str, _: PrecisionSpec) -> Result<Self> {
        let [hi, lo] = parse_components::<2>(s)?;
        let x = DoubleDouble::from_parts_unchecked(hi, lo);
        if x.is_finite() && !x.is_normalized() {
            return Err(Error::format(
                0,
                format!("double-double {s:?} is not normalized"),
            ));
        }
        Ok(x)
    }
}

impl Scalar for QuadDouble {
    const KIND: PrecisionKind = PrecisionKind::Qd;

    #[inline]
    fn zero(_: PrecisionSpec) -> Self {
        QuadDouble::ZERO
    }

    fn from_f64(x: f64, _: PrecisionSpec) -> Self {
        QuadDouble::from_f64(x)
    }

    fn from_big(x: &Float, _: PrecisionSpec) -> Self {
        QuadDouble::from_components_unchecked(split_float::<4>(x))
    }

    fn to_big(&self) -> Float {
        exact_float_sum(&self.components())
    }

    fn precision(&self) -> PrecisionSpec {
        PrecisionSpec::QD
    }

    fn to_f64(&self) -> f64 {
        QuadDouble::to_f64(*self)
    }

    fn is_finite(&self) -> bool {
        QuadDouble::is_finite(*self)
    }

    #[inline(always)]
    fn set_zero(&mut self) {
        *self = QuadDouble::ZERO;
    }

    #[inline(always)]
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += *rhs;
    }

    #[inline(always)]
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= *rhs;
    }

    #[inline(always)]
    fn set_sum(&mut self, a: &Self, b: &Self) {
        *self = *a + *b;
    }

    #[inline(always)]
    fn set_difference(&mut self, a: &Self, b: &Self) {
        *self = *a - *b;
    }

    #[inline(always)]
    fn set_product(&mut self, a: &Self, b: &Self) {
        *self = *a * *b;
    }

    #[inline(always)]
    fn mul_acc(&mut self, a: &Self, b: &Self, _: &mut Self) {
        *self += *a * *b;
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        *self / *rhs
    }

    fn sqrt_ref(&self) -> Self {
        self.sqrt()
    }

    fn to_hex(&self) -> String {
        let c = self.components().map(hex::format_f64);
        c.join(",")
    }

    fn from_hex(s: &str, _: PrecisionSpec) -> Result<Self> {
        let c = parse_components::<4>(s)?;
        let x = QuadDouble::from_components_unchecked(c);
        if x.is_finite() && !x.is_normalized() {
            return Err(Error::format(
                0,
                format!("quad-double {s:?} is not normalized"),
            ));
        }
        Ok(x)
    }
}

impl Scalar for BigFloat {
    const KIND: PrecisionKind = PrecisionKind::Ap;

    fn zero(prec: PrecisionSpec) -> Self {
        BigFloat::zero(prec.bits())
    }

    fn from_f64(x: f64, prec: PrecisionSpec) -> Self {
        BigFloat::from_f64(x, prec.bits())
    }

    fn from_big(x: &Float, prec: PrecisionSpec) -> Self {
        BigFloat::from_float(x, prec.bits())
    }

    fn to_big(&self) -> Float {
        self.as_float().clone()
    }

    fn precision(&self) -> PrecisionSpec {
        PrecisionSpec {
            kind: PrecisionKind::Ap,
            bits: self.bits(),
        }
    }

    fn to_f64(&self) -> f64 {
        BigFloat::to_f64(self)
    }

    fn is_finite(&self) -> bool {
        BigFloat::is_finite(self)
    }

    #[inline]
    fn set_zero(&mut self) {
        BigFloat::set_zero(self)
    }

    #[inline]
    fn add_assign_ref(&mut self, rhs: &Self) {
        BigFloat::add_assign_ref(self, rhs)
    }

    #[inline]
    fn sub_assign_ref(&mut self, rhs: &Self) {
        BigFloat::sub_assign_ref(self, rhs)
    }

    #[inline]
    fn set_sum(&mut self, a: &Self, b: &Self) {
        BigFloat::set_sum(self, a, b)
    }

    #[inline]
    fn set_difference(&mut self, a: &Self, b: &Self) {
        BigFloat::set_difference(self, a, b)
    }

    #[inline]
    fn set_product(&mut self, a: &Self, b: &Self) {
        BigFloat::set_product(self, a, b)
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        self.div(rhs)
    }

    fn sqrt_ref(&self) -> Self {
        self.sqrt()
    }

    fn to_hex(&self) -> String {
        BigFloat::to_hex(self)
    }

    fn from_hex(s: &str, prec: PrecisionSpec) -> Result<Self> {
        BigFloat::from_hex(s, prec.bits())
    }
}

/// A scalar whose precision is chosen at run time.
#[derive(Clone, PartialEq)]
pub enum ExtendedScalar {
    Dd(DoubleDouble),
    Qd(QuadDouble),
    Ap(BigFloat),
}

// Guard bits used when a decimal literal is parsed on its way to DD/QD.
const LITERAL_GUARD_BITS: u32 = 64;

impl ExtendedScalar {
    pub fn zero(prec: PrecisionSpec) -> Self {
        Self::from_f64(0.0, prec)
    }

    pub fn from_f64(x: f64, prec: PrecisionSpec) -> Self {
        match prec.kind {
            PrecisionKind::Dd => Self::Dd(DoubleDouble::from_f64(x)),
            PrecisionKind::Qd => Self::Qd(QuadDouble::from_f64(x)),
            PrecisionKind::Ap => Self::Ap(BigFloat::from_f64(x, prec.bits)),
        }
    }

    pub fn from_big(x: &Float, prec: PrecisionSpec) -> Self {
        match prec.kind {
            PrecisionKind::Dd => Self::Dd(DoubleDouble::from_big(x, prec)),
            PrecisionKind::Qd => Self::Qd(QuadDouble::from_big(x, prec)),
            PrecisionKind::Ap => Self::Ap(BigFloat::from_float(x, prec.bits)),
        }
    }

    /// Parses a decimal literal. The literal is rounded by the big-float
    /// backend first; DD/QD then take the leading doubles of that value.
    pub fn from_decimal(s: &str, prec: PrecisionSpec) -> Result<Self> {
        let parse_bits = match prec.kind {
            PrecisionKind::Ap => prec.bits,
            _ => prec.bits + LITERAL_GUARD_BITS,
        };
        let big = BigFloat::parse_decimal(s, parse_bits)?;
        if !big.is_finite() {
            return Err(Error::range(format!("literal {s:?} is not finite")));
        }
        let v = Self::from_big(big.as_float(), prec);
        v.check_finite("decimal literal")
    }

    pub fn precision(&self) -> PrecisionSpec {
        match self {
            Self::Dd(_) => PrecisionSpec::DD,
            Self::Qd(_) => PrecisionSpec::QD,
            Self::Ap(x) => Scalar::precision(x),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Dd(x) => x.to_f64(),
            Self::Qd(x) => x.to_f64(),
            Self::Ap(x) => x.to_f64(),
        }
    }

    pub fn to_big(&self) -> Float {
        match self {
            Self::Dd(x) => x.to_big(),
            Self::Qd(x) => x.to_big(),
            Self::Ap(x) => x.to_big(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::Dd(x) => x.is_finite(),
            Self::Qd(x) => x.is_finite(),
            Self::Ap(x) => x.is_finite(),
        }
    }

    fn check_finite(self, op: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::range(format!(
                "{op} overflowed at {}",
                self.precision()
            )))
        }
    }

    fn binary<'a>(
        &'a self,
        rhs: &'a Self,
        op: &str,
        dd: impl FnOnce(DoubleDouble, DoubleDouble) -> DoubleDouble,
        qd: impl FnOnce(QuadDouble, QuadDouble) -> QuadDouble,
        ap: impl FnOnce(&BigFloat, &BigFloat) -> BigFloat,
    ) -> Result<Self> {
        let out = match (self, rhs) {
            (Self::Dd(a), Self::Dd(b)) => Self::Dd(dd(*a, *b)),
            (Self::Qd(a), Self::Qd(b)) => Self::Qd(qd(*a, *b)),
            (Self::Ap(a), Self::Ap(b)) if a.bits() == b.bits() => Self::Ap(ap(a, b)),
            _ => return Err(Error::PrecisionMismatch(self.precision(), rhs.precision())),
        };
        out.check_finite(op)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.binary(
            rhs,
            "add",
            |a, b| a + b,
            |a, b| a + b,
            |a, b| {
                let mut out = BigFloat::zero(a.bits());
                out.set_sum(a, b);
                out
            },
        )
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.binary(
            rhs,
            "sub",
            |a, b| a - b,
            |a, b| a - b,
            |a, b| {
                let mut out = BigFloat::zero(a.bits());
                out.set_difference(a, b);
                out
            },
        )
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.binary(
            rhs,
            "mul",
            |a, b| a * b,
            |a, b| a * b,
            |a, b| {
                let mut out = BigFloat::zero(a.bits());
                out.set_product(a, b);
                out
            },
        )
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.to_f64() == 0.0 {
            return Err(Error::range("division by zero"));
        }
        self.binary(rhs, "div", |a, b| a / b, |a, b| a / b, |a, b| a.div(b))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.to_f64() < 0.0 {
            return Err(Error::range("square root of a negative value"));
        }
        let out = match self {
            Self::Dd(x) => Self::Dd(x.sqrt()),
            Self::Qd(x) => Self::Qd(x.sqrt()),
            Self::Ap(x) => Self::Ap(x.sqrt()),
        };
        out.check_finite("sqrt")
    }

    pub fn to_hex(&self) -> String {
        match self {
            Self::Dd(x) => x.to_hex(),
            Self::Qd(x) => x.to_hex(),
            Self::Ap(x) => x.to_hex(),
        }
    }
}

impl fmt::Debug for ExtendedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dd(x) => x.fmt(f),
            Self::Qd(x) => x.fmt(f),
            Self::Ap(x) => x.fmt(f),
        }
    }
}

impl From<DoubleDouble> for ExtendedScalar {
    fn from(x: DoubleDouble) -> Self {
        Self::Dd(x)
    }
}

impl From<QuadDouble> for ExtendedScalar {
    fn from(x: QuadDouble) -> Self {
        Self::Qd(x)
    }
}

impl From<BigFloat> for ExtendedScalar {
    fn from(x: BigFloat) -> Self {
        Self::Ap(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_parsing() {
        assert_eq!("dd".parse::<PrecisionSpec>().unwrap(), PrecisionSpec::DD);
        assert_eq!("QD".parse::<PrecisionSpec>().unwrap(), PrecisionSpec::QD);
        assert_eq!(
            "dd,106".parse::<PrecisionSpec>().unwrap(),
            PrecisionSpec::DD
        );
        let ap = "ap:128".parse::<PrecisionSpec>().unwrap();
        assert_eq!((ap.kind(), ap.bits()), (PrecisionKind::Ap, 128));
        assert_eq!("ap,128".parse::<PrecisionSpec>().unwrap(), ap);
        assert_eq!(ap.to_string(), "ap,128");
        assert_eq!(ap.short_name(), "ap:128");
        assert!("ap".parse::<PrecisionSpec>().is_err());
        assert!("ap:8".parse::<PrecisionSpec>().is_err());
        assert!("dd,107".parse::<PrecisionSpec>().is_err());
        assert!("fp64".parse::<PrecisionSpec>().is_err());
        assert!(PrecisionSpec::ap(1 << 20).is_ok());
        assert!(PrecisionSpec::ap((1 << 20) + 1).is_err());
    }

    #[test]
    fn unit_roundoff() {
        assert_eq!(PrecisionSpec::DD.unit_roundoff(), 2f64.powi(-106));
        assert_eq!(
            PrecisionSpec::ap(128).unwrap().unit_roundoff(),
            2f64.powi(-128)
        );
        assert_eq!(
            PrecisionSpec::ap(1024).unwrap().unit_roundoff(),
            f64::from_bits(1 << 50)
        );
        assert_eq!(PrecisionSpec::ap(2048).unwrap().unit_roundoff(), 0.0);
    }

    #[test]
    fn mismatched_precision_is_a_usage_error() {
        let a = ExtendedScalar::from_f64(1.0, PrecisionSpec::DD);
        let b = ExtendedScalar::from_f64(1.0, PrecisionSpec::QD);
        let c = ExtendedScalar::from_f64(1.0, PrecisionSpec::ap(128).unwrap());
        let d = ExtendedScalar::from_f64(1.0, PrecisionSpec::ap(256).unwrap());
        assert!(matches!(a.add(&b), Err(Error::PrecisionMismatch(..))));
        assert!(matches!(c.mul(&d), Err(Error::PrecisionMismatch(..))));
        assert!(a.add(&a).is_ok());
    }

    #[test]
    fn overflow_is_a_range_error() {
        for prec in [PrecisionSpec::DD, PrecisionSpec::QD] {
            let big = ExtendedScalar::from_f64(f64::MAX, prec);
            assert!(matches!(big.add(&big), Err(Error::Range(_))));
            assert!(matches!(big.mul(&big), Err(Error::Range(_))));
        }
        let one = ExtendedScalar::from_f64(1.0, PrecisionSpec::DD);
        let zero = ExtendedScalar::zero(PrecisionSpec::DD);
        assert!(matches!(one.div(&zero), Err(Error::Range(_))));
        assert!(matches!(
            one.sub(&one).unwrap().sub(&one).unwrap().sqrt(),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn decimal_literals() {
        let x = ExtendedScalar::from_decimal("0.1", PrecisionSpec::DD).unwrap();
        let ExtendedScalar::Dd(dd) = x else { panic!() };
        assert_eq!(dd.hi(), 0.1);
        assert!(dd.lo() != 0.0 && dd.is_normalized());
        let q = ExtendedScalar::from_decimal("1e-5", PrecisionSpec::QD).unwrap();
        let ExtendedScalar::Qd(qd) = q else { panic!() };
        assert!(qd.is_normalized());
        assert!(ExtendedScalar::from_decimal("1e999999", PrecisionSpec::DD).is_err());
        assert!(ExtendedScalar::from_decimal("abc", PrecisionSpec::DD).is_err());
    }

    #[test]
    fn to_big_is_exact_for_wide_gaps() {
        let x = DoubleDouble::from_parts_unchecked(1.0, 2f64.powi(-1000));
        let big = x.to_big();
        let back = DoubleDouble::from_big(&big, PrecisionSpec::DD);
        assert_eq!(back, x);
        assert!(big > 1.0);
    }

    #[test]
    fn hex_round_trip_each_kind() {
        let dd = DoubleDouble::new(0.1, 2f64.powi(-60));
        assert_eq!(
            DoubleDouble::from_hex(&dd.to_hex(), PrecisionSpec::DD).unwrap(),
            dd
        );
        let qd = QuadDouble::new(0.1, 2f64.powi(-60), 2f64.powi(-130), 2f64.powi(-190));
        assert_eq!(
            QuadDouble::from_hex(&qd.to_hex(), PrecisionSpec::QD).unwrap(),
            qd
        );
        assert!(DoubleDouble::from_hex("0x1p+0,0x1p+0", PrecisionSpec::DD).is_err());
        assert!(DoubleDouble::from_hex("0x1p+0", PrecisionSpec::DD).is_err());
        assert!(
            QuadDouble::from_hex("0x1p+0,0x0p+0,0x0p+0,0x0p+0,0x0p+0", PrecisionSpec::QD).is_err()
        );
    }
}

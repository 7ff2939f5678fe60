//! Arbitrary-precision adapter over MPFR (via `rug`). Every value owns its
//! own limbs; there is no shared mutable big-float state.

use std::fmt;

use rug::float::Round;
use rug::ops::{AddAssignRound, SubAssignRound};
use rug::{Assign, Float, Integer};

use crate::error::{Error, Result};

pub const MIN_BITS: u32 = 24;
pub const MAX_BITS: u32 = 1 << 20;

/// A big-float with a fixed mantissa width; operations round to nearest at
/// the precision of the destination.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigFloat(Float);

impl BigFloat {
    pub fn zero(bits: u32) -> Self {
        Self(Float::new(bits))
    }

    pub fn from_f64(x: f64, bits: u32) -> Self {
        Self(Float::with_val(bits, x))
    }

    /// Rounds an existing MPFR value to `bits`.
    pub fn from_float(x: &Float, bits: u32) -> Self {
        Self(Float::with_val(bits, x))
    }

    /// Parses a decimal literal, correctly rounded to `bits`.
    pub fn parse_decimal(s: &str, bits: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::usage(format!("bad decimal literal {s:?}: {e}")))?;
        Ok(Self(Float::with_val(bits, parsed)))
    }

    pub fn bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn set_zero(&mut self) {
        self.0.assign(0);
    }

    #[inline]
    pub fn add_assign_ref(&mut self, rhs: &Self) {
        self.0.add_assign_round(&rhs.0, Round::Nearest);
    }

    #[inline]
    pub fn sub_assign_ref(&mut self, rhs: &Self) {
        self.0.sub_assign_round(&rhs.0, Round::Nearest);
    }

    #[inline]
    pub fn set_sum(&mut self, a: &Self, b: &Self) {
        self.0.assign(&a.0 + &b.0);
    }

    #[inline]
    pub fn set_difference(&mut self, a: &Self, b: &Self) {
        self.0.assign(&a.0 - &b.0);
    }

    #[inline]
    pub fn set_product(&mut self, a: &Self, b: &Self) {
        self.0.assign(&a.0 * &b.0);
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let mut out = Float::new(self.bits());
        out.assign(&self.0 / &rhs.0);
        Self(out)
    }

    pub fn sqrt(&self) -> Self {
        let mut out = Float::new(self.bits());
        out.assign(self.0.sqrt_ref());
        Self(out)
    }

    /// Exact `[-]0x<hex mantissa>p<exponent>` encoding, or `0x0p+0` for zero.
    pub fn to_hex(&self) -> String {
        match self.0.to_integer_exp() {
            Some((mut mantissa, mut exp)) if mantissa != 0 => {
                if let Some(tz) = mantissa.find_one(0) {
                    mantissa >>= tz;
                    exp += tz as i32;
                }
                let sign = if mantissa < 0 { "-" } else { "" };
                let digits = mantissa.abs().to_string_radix(16);
                format!("{sign}0x{digits}p{exp:+}")
            }
            _ if self.0.is_zero() => {
                if self.0.is_sign_negative() {
                    "-0x0p+0".into()
                } else {
                    "0x0p+0".into()
                }
            }
            _ => format!("{}", self.0),
        }
    }

    /// Inverse of [`BigFloat::to_hex`]. Fails if the mantissa does not fit
    /// in `bits`.
    pub fn from_hex(s: &str, bits: u32) -> Result<Self> {
        let bad = || Error::format(0, format!("bad big-float hex literal {s:?}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.strip_prefix("0x").ok_or_else(bad)?;
        let (digits, exp) = body.split_once('p').ok_or_else(bad)?;
        let exp: i32 = exp.parse().map_err(|_| bad())?;
        let mut mantissa = Integer::from_str_radix(digits, 16).map_err(|_| bad())?;
        if neg {
            mantissa = -mantissa;
        }
        if mantissa.significant_bits() > bits {
            return Err(Error::format(
                0,
                format!("mantissa of {s:?} needs more than {bits} bits"),
            ));
        }
        let mut value = Float::with_val(bits, &mantissa);
        if neg && mantissa == 0 {
            value = -value;
        }
        value <<= exp;
        Ok(Self(value))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat[{}]({})", self.bits(), self.0)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_is_exact() {
        let x = BigFloat::from_f64(5.0, 128).sqrt();
        let h = x.to_hex();
        assert_eq!(BigFloat::from_hex(&h, 128).unwrap(), x);
        let neg = BigFloat::from_f64(-0.375, 200);
        assert_eq!(neg.to_hex(), "-0x3p-3");
        assert_eq!(BigFloat::from_hex("-0x3p-3", 200).unwrap(), neg);
        assert_eq!(BigFloat::zero(64).to_hex(), "0x0p+0");
    }

    #[test]
    fn hex_rejects_oversized_mantissa() {
        let x = BigFloat::from_f64(3.0, 512).sqrt();
        assert!(BigFloat::from_hex(&x.to_hex(), 128).is_err());
        assert!(BigFloat::from_hex("0x1q+3", 128).is_err());
    }

    #[test]
    fn operations_round_at_destination_precision() {
        let a = BigFloat::from_f64(1.0, 64);
        let tiny = BigFloat::from_f64(2f64.powi(-100), 64);
        let mut s = BigFloat::zero(64);
        s.set_sum(&a, &tiny);
        assert_eq!(s, a);
        let mut wide = BigFloat::zero(128);
        wide.set_sum(&a, &tiny);
        assert_ne!(wide.as_float(), a.as_float());
    }
}

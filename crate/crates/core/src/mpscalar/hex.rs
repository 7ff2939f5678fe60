//! C99-style hexadecimal float text for native doubles (`0x1.8p+3`), used
//! wherever a double must round-trip bit-exactly through text.

use crate::error::{Error, Result};

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    if frac == 0 {
        return format!("{sign}0x{lead}p{exp:+}");
    }
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    format!("{sign}0x{lead}.{digits}p{exp:+}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    hexf_parse::parse_hexf64(s, false)
        .map_err(|e| Error::format(0, format!("bad hex float {s:?}: {e}")))
}

//! Exact rational numbers used for every count-derived rate.
//!
//! Rates are ratios of record counts, so all of the identities the auditor
//! relies on (posterior decomposition, representativity equivalence, the
//! factored parity gap) hold with equality here rather than to a rounding
//! tolerance. Conversion to `f64` happens only when reporting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::FairnessError;

/// Arbitrary-precision rational number.
pub type Fraction = BigRational;

/// Builds `numer / denom`. Panics if `denom` is zero.
pub fn ratio(numer: u64, denom: u64) -> Fraction {
    Fraction::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn from_int(value: i64) -> Fraction {
    Fraction::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Fraction) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn is_unit(value: &Fraction) -> bool {
    !value.is_negative() && *value <= Fraction::one()
}

/// Rejects values outside `[0, 1]`.
pub fn check_unit(name: &'static str, value: &Fraction) -> Result<(), FairnessError> {
    if is_unit(value) {
        Ok(())
    } else {
        Err(FairnessError::Domain {
            name,
            value: value.to_string(),
        })
    }
}

/// Parses a fraction literal.
///
/// Accepts `a/b`, plain integers, decimals (`0.3`, `.25`) and scientific
/// notation (`1e-9`, `2.5E3`). Decimal input is converted exactly, so
/// `0.1` becomes `1/10` and not the nearest binary double.
pub fn parse_fraction(text: &str) -> Result<Fraction, FairnessError> {
    let text = text.trim();
    let invalid = || FairnessError::Parse(text.to_string());
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(invalid)?;
        let den = parse_decimal(den.trim()).ok_or_else(invalid)?;
        if den.is_zero() {
            return Err(invalid());
        }
        return Ok(num / den);
    }
    parse_decimal(text).ok_or_else(invalid)
}

fn parse_decimal(text: &str) -> Option<Fraction> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    let ten = BigInt::from(10u8);
    let mut value = Fraction::from_integer(numer);
    if scale >= 0 {
        value *= Fraction::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Fraction::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    }
    Some(if negative { -value } else { value })
}

/// Converts a finite `f64` through its shortest round-trip decimal form, so
/// `0.3_f64` becomes exactly `3/10`.
pub fn from_f64_decimal(value: f64) -> Result<Fraction, FairnessError> {
    if !value.is_finite() {
        return Err(FairnessError::Parse(value.to_string()));
    }
    parse_fraction(&format!("{value}"))
}

pub fn half() -> Fraction {
    ratio(1, 2)
}

pub fn abs(value: &Fraction) -> Fraction {
    value.abs()
}

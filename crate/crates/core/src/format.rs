//! Exact decimal rendering of rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Significant digits used for rendered rationals in tables.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Renders `value` with `digits` significant digits in plain positional
/// notation (never scientific), rounding half away from zero.
pub fn significant(value: &BigRational, digits: usize) -> String {
    assert!(digits > 0);
    if value.is_zero() {
        return "0".to_owned();
    }
    let negative = value.is_negative();
    let v = value.abs();
    // Find e with 10^e <= v < 10^(e+1).
    let mut e = estimate_log10(&v);
    while pow10_rational(e) > v {
        e -= 1;
    }
    while pow10_rational(e + 1) <= v {
        e += 1;
    }
    // Scale so that the integer part carries exactly `digits` digits.
    let shift = digits as i64 - 1 - e;
    let scaled = &v * pow10_rational(shift);
    let mut mantissa = round_half_up(&scaled);
    let mut shift = shift;
    if mantissa == BigInt::from(10u32).pow(digits as u32) {
        mantissa /= 10;
        shift -= 1;
    }
    let body = place_point(&mantissa.to_string(), shift);
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Renders `value` with exactly `places` digits after the decimal point.
pub fn fixed(value: &BigRational, places: usize) -> String {
    let negative = value.is_negative();
    let scaled = value.abs() * pow10_rational(places as i64);
    let body = place_point(&round_half_up(&scaled).to_string(), places as i64);
    if negative && body.chars().any(|c| c != '0' && c != '.') {
        format!("-{body}")
    } else {
        body
    }
}

fn estimate_log10(v: &BigRational) -> i64 {
    let bits = v.numer().bits() as i64 - v.denom().bits() as i64;
    (bits as f64 * std::f64::consts::LOG10_2).floor() as i64
}

fn pow10_rational(e: i64) -> BigRational {
    let p = BigInt::from(10u32).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

fn round_half_up(v: &BigRational) -> BigInt {
    let (q, r) = v.numer().div_rem(v.denom());
    if BigInt::from(2) * r >= *v.denom() {
        q + 1
    } else {
        q
    }
}

// Inserts a decimal point so that the result equals digits * 10^-shift.
fn place_point(digits: &str, shift: i64) -> String {
    if shift <= 0 {
        let mut s = digits.to_owned();
        s.extend(std::iter::repeat_n('0', (-shift) as usize));
        return s;
    }
    let shift = shift as usize;
    let padded = if digits.len() <= shift {
        format!("{}{}", "0".repeat(shift + 1 - digits.len()), digits)
    } else {
        digits.to_owned()
    };
    let (int, frac) = padded.split_at(padded.len() - shift);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_owned()
    } else {
        format!("{int}.{frac}")
    }
}

/// Lossy conversion for reporting.
pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Natural logarithm of a positive big integer, without overflow.
pub fn ln_bigint(value: &BigInt) -> f64 {
    assert!(value.is_positive(), "logarithm of a non-positive integer");
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = value >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn significant_digits() {
        assert_eq!(significant(&rat(1, 3), 12), "0.333333333333");
        assert_eq!(significant(&rat(2, 3), 3), "0.667");
        assert_eq!(significant(&rat(5, 1), 12), "5");
        assert_eq!(significant(&rat(-1234567, 1000), 4), "-1235");
        assert_eq!(significant(&rat(-1234567, 1_000_000), 4), "-1.235");
        assert_eq!(significant(&rat(99999, 1000), 3), "100");
        assert_eq!(significant(&rat(1, 1_000_000), 2), "0.000001");
        assert_eq!(significant(&rat(123456789, 1), 3), "123000000");
        assert_eq!(significant(&rat(0, 1), 3), "0");
    }

    #[test]
    fn fixed_places() {
        assert_eq!(fixed(&rat(1, 3), 4), "0.3333");
        assert_eq!(fixed(&rat(-1, 8), 2), "-0.13");
        assert_eq!(fixed(&rat(7, 1), 0), "7");
    }

    #[test]
    fn log_of_huge_integer() {
        let x = BigInt::from(3u32).pow(2000);
        assert!((ln_bigint(&x) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((ln_bigint(&BigInt::from(10)) - 10f64.ln()).abs() < 1e-15);
    }
}

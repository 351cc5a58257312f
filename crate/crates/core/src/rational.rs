//! Exact rational plumbing for adversarial proportions.
//!
//! Proportions compare counts that can be astronomically large against
//! thresholds like 0.03; floats would lie, so thresholds are parsed exactly
//! and ratios stay big-integer fractions end to end.

use alloc::string::String;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parses a decimal string ("0.03", "1", ".5") or a fraction ("1/20") into
/// an exact rational.
pub fn parse_ratio(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad(text))?;
        let d: BigInt = den.trim().parse().map_err(|_| bad(text))?;
        if d.is_zero() {
            return Err(bad(text));
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-BigInt::one(), rest),
        None => (BigInt::one(), text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad(text));
    }
    let valid = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !valid(int_part) || !valid(frac_part) {
        return Err(bad(text));
    }
    let mut all = String::from(int_part);
    all.push_str(frac_part);
    let mantissa: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad(text))?
    };
    let denom = BigInt::from(10u8).pow(frac_part.len() as u32);
    Ok(BigRational::new(sign * mantissa, denom))
}

fn bad(text: &str) -> String {
    alloc::format!("not a decimal or fraction: {text:?}")
}

/// `numerator / denominator` as an exact ratio, with the empty region's
/// 0 / 0 defined as zero.
pub fn ratio_or_zero(numerator: &BigUint, denominator: &BigUint) -> BigRational {
    if denominator.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(numerator.clone()), BigInt::from(denominator.clone()))
    }
}

/// Plain decimal rendering with six significant digits ("0.0299993",
/// "1.00000", "0"); falls back to scientific notation only for values below
/// 1e-12 where the plain form would be unreadable.
pub fn format_ratio_decimal(r: &BigRational) -> String {
    if r.is_zero() {
        return String::from("0");
    }
    let x = ratio_to_f64(r);
    if x == 0.0 {
        return String::from("0");
    }
    let mag = libm::floor(libm::log10(libm::fabs(x))) as i32;
    if mag < -12 {
        return alloc::format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    alloc::format!("{x:.decimals$}")
}

/// Nearest double to the exact ratio; used only for display.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Enormous numerator/denominator: scale down by the denominator's bit
    // length first.
    let shift = r.denom().abs().to_biguint().unwrap().bits().saturating_sub(64);
    let num = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let den = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_ratio("0.03").unwrap(), rat(3, 100));
        assert_eq!(parse_ratio("1").unwrap(), rat(1, 1));
        assert_eq!(parse_ratio("0").unwrap(), rat(0, 1));
        assert_eq!(parse_ratio(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_ratio("2.").unwrap(), rat(2, 1));
        assert_eq!(parse_ratio("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_ratio("1/20").unwrap(), rat(1, 20));
        assert_eq!(parse_ratio(" 3/4 ").unwrap(), rat(3, 4));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio(".").is_err());
        assert!(parse_ratio("1.2.3").is_err());
    }

    #[test]
    fn zero_denominator_ratio_is_zero() {
        let zero = BigUint::zero();
        assert!(ratio_or_zero(&zero, &zero).is_zero());
        let r = ratio_or_zero(&BigUint::from(3u8), &BigUint::from(12u8));
        assert_eq!(r, rat(1, 4));
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_ratio_decimal(&rat(0, 1)), "0");
        assert_eq!(format_ratio_decimal(&rat(1, 1)), "1.00000");
        assert_eq!(format_ratio_decimal(&rat(3, 100)), "0.0300000");
        assert_eq!(format_ratio_decimal(&rat(1, 3)), "0.333333");
        assert_eq!(format_ratio_decimal(&rat(2, 3)), "0.666667");
    }
}

//! Exact rational helpers: parsing, formatting, decimal rendering.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// The exact number type used everywhere in the workbench.
pub type Ratio = BigRational;

pub fn ratio(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

/// Parses "a/b" or a plain integer string into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let err = || Error::Validation(format!("cannot parse rational from {s:?} (expected \"a/b\" or an integer)"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(Error::Validation(format!("zero denominator in {s:?}")));
        }
        Ok(Ratio::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| err())?;
        Ok(Ratio::from_integer(num))
    }
}

/// Renders a rational in its reduced "a/b" form ("a" when the denominator is 1).
pub fn ratio_string(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with the given number of significant digits,
/// derived from the exact rational (no float round-trip).
pub fn decimal_string(r: &Ratio, sig_digits: usize) -> String {
    assert!(sig_digits > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();

    // Find exponent e with 10^e <= num/den < 10^(e+1).
    let mut exp: i64 = 0;
    let ten = BigInt::from(10);
    let mut scaled_num = num.clone();
    let mut scaled_den = den.clone();
    while scaled_num >= scaled_den {
        scaled_den *= &ten;
        exp += 1;
    }
    while &scaled_num * &ten < scaled_den {
        scaled_num *= &ten;
        exp -= 1;
    }
    // Now 1/10 <= scaled_num/scaled_den < 1; leading digit is at position exp.
    // Extract sig_digits digits, then round half-up on the next one.
    let mut digits: Vec<u8> = Vec::with_capacity(sig_digits + 1);
    let mut rem = scaled_num;
    for _ in 0..sig_digits {
        rem *= &ten;
        let d = &rem / &scaled_den;
        rem -= &d * &scaled_den;
        let (_, ds) = d.to_u32_digits();
        digits.push(*ds.first().unwrap_or(&0) as u8);
    }
    // Round half-up using the remainder.
    if &rem * 2 >= scaled_den {
        let mut i = sig_digits;
        loop {
            if i == 0 {
                digits.insert(0, 1);
                exp += 1;
                digits.truncate(sig_digits);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    while digits.len() > 1 && *digits.last().unwrap() == 0 {
        digits.pop();
    }

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp <= 0 {
        // 0.00ddd form; fall back to scientific when very small.
        if exp < -4 {
            out.push(char::from(b'0' + digits[0]));
            if digits.len() > 1 {
                out.push('.');
                for &d in &digits[1..] {
                    out.push(char::from(b'0' + d));
                }
            }
            out.push_str(&format!("e{}", exp - 1));
        } else {
            out.push_str("0.");
            for _ in 0..(-exp) {
                out.push('0');
            }
            for &d in &digits {
                out.push(char::from(b'0' + d));
            }
        }
    } else {
        let int_len = exp as usize;
        if int_len >= digits.len() {
            for (i, &d) in digits.iter().enumerate() {
                let _ = i;
                out.push(char::from(b'0' + d));
            }
            for _ in digits.len()..int_len {
                out.push('0');
            }
        } else {
            for &d in &digits[..int_len] {
                out.push(char::from(b'0' + d));
            }
            out.push('.');
            for &d in &digits[int_len..] {
                out.push(char::from(b'0' + d));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(ratio_string(&parse_ratio("3/10").unwrap()), "3/10");
        assert_eq!(ratio_string(&parse_ratio("4/8").unwrap()), "1/2");
        assert_eq!(ratio_string(&parse_ratio("7").unwrap()), "7");
        assert_eq!(ratio_string(&parse_ratio("-3/4").unwrap()), "-3/4");
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&ratio(1, 16), 15), "0.0625");
        assert_eq!(decimal_string(&ratio(1029, 10000), 15), "0.1029");
        assert_eq!(decimal_string(&ratio(1, 3), 5), "0.33333");
        assert_eq!(decimal_string(&ratio(2, 3), 5), "0.66667");
        assert_eq!(decimal_string(&int(0), 15), "0");
        assert_eq!(decimal_string(&int(42), 15), "42");
        assert_eq!(decimal_string(&ratio(-1, 4), 15), "-0.25");
        assert_eq!(decimal_string(&ratio(999, 1000), 2), "1");
        assert_eq!(decimal_string(&ratio(2401, 10000), 15), "0.2401");
    }
}

//! Helpers for exact rational parameters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "zero denominator in {s:?}"
            )));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac_part.contains(['+', '-']) || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" {
        format!("{digits}0")
    } else {
        digits
    };
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Both parts may overflow f64 separately; rescale through the bit length.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
        let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        num / den
    })
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn powi(base: &Rational, exp: i64) -> Rational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/10").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("1e3").unwrap(), int(1000));
        assert_eq!(parse_rational("2.5e-1").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational(" 3 / 6 ").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn powers() {
        assert_eq!(powi(&ratio(4, 5), -1), ratio(5, 4));
        assert_eq!(powi(&ratio(2, 3), 3), ratio(8, 27));
        assert_eq!(powi(&ratio(2, 3), 0), int(1));
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = Rational::new(big.clone() * 3, big * 4);
        assert!((to_f64(&r) - 0.75).abs() < 1e-15);
    }
}

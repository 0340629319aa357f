//! Exact parsing of thresholds such as `7/8`, `0.875` or `1`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Parses `p/q`, an integer, or a decimal literal into an exact rational.
/// Decimals never pass through binary floating point: `0.875` is `7/8`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |msg: &str| Error::parse(1, 1, format!("{msg}: {s:?}"));
    if s.is_empty() {
        return Err(bad("empty rational"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad("no digits"));
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("not a number"));
    }
    let digits = format!("{int}{frac}");
    let numer: BigUint = if digits.is_empty() {
        BigUint::zero()
    } else {
        digits.parse().map_err(|_| bad("not a number"))?
    };
    let denom = BigUint::from(10u32).pow(frac.len() as u32);
    let mut value = BigRational::new(numer.into(), denom.into());
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses a rational and checks `0 <= r <= 1`.
pub fn parse_unit_rational(s: &str) -> Result<BigRational> {
    let r = parse_rational(s)?;
    if r < BigRational::zero() || r > BigRational::one() {
        return Err(Error::Parameter(format!("{s} is outside [0, 1]")));
    }
    Ok(r)
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

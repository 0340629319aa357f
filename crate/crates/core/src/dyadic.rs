//! Exact non-negative dyadic rationals `numerator / 2^exponent`.
//!
//! Every value `T(y)` of a decision tree on a partial input is of this form,
//! so probabilities are carried exactly with an arbitrary-precision numerator.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `numerator / 2^exponent` kept in canonical form: the numerator is odd
/// whenever the exponent is positive, and zero is `0/2^0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    exponent: u64,
}

impl DyadicRational {
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        let mut value = DyadicRational {
            numerator,
            exponent,
        };
        value.normalize();
        value
    }

    pub fn from_u64(numerator: u64, exponent: u64) -> Self {
        Self::new(BigUint::from(numerator), exponent)
    }

    /// `2^-exponent`.
    pub fn pow2_inv(exponent: u64) -> Self {
        DyadicRational {
            numerator: BigUint::one(),
            exponent,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self
            .numerator
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.exponent);
        if tz > 0 {
            self.numerator >>= tz;
            self.exponent -= tz;
        }
    }

    pub fn half(&self) -> Self {
        Self::new(self.numerator.clone(), self.exponent + 1)
    }

    /// Mean of two values.
    pub fn average(a: &Self, b: &Self) -> Self {
        (a + b).half()
    }

    /// `1 - self`, or `None` when `self > 1`.
    pub fn one_minus(&self) -> Option<Self> {
        let one = self.denominator();
        if self.numerator > one {
            None
        } else {
            Some(Self::new(one - &self.numerator, self.exponent))
        }
    }

    /// Difference `self - other`, or `None` when it would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        if a < b {
            None
        } else {
            Some(Self::new(a - b, e))
        }
    }

    pub fn is_probability(&self) -> bool {
        self.numerator <= self.denominator()
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone().into(), self.denominator().into())
    }

    /// Exact comparison against an arbitrary rational.
    pub fn cmp_rational(&self, other: &BigRational) -> Ordering {
        self.to_rational().cmp(other)
    }

    /// Renders as `numerator/2^exponent`.
    pub fn pow2_form(&self) -> String {
        format!("{}/2^{}", self.numerator, self.exponent)
    }

    /// Exact decimal expansion; every dyadic rational terminates in base 10.
    pub fn to_decimal(&self) -> String {
        if self.exponent == 0 {
            return self.numerator.to_string();
        }
        // n / 2^e = n * 5^e / 10^e
        let scaled = &self.numerator * BigUint::from(5u32).pow(self.exponent as u32);
        let digits = scaled.to_string();
        let e = self.exponent as usize;
        if digits.len() <= e {
            format!("0.{}{}", "0".repeat(e - digits.len()), digits)
        } else {
            let (int, frac) = digits.split_at(digits.len() - e);
            format!("{int}.{frac}")
        }
    }
}

impl Zero for DyadicRational {
    fn zero() -> Self {
        DyadicRational {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl One for DyadicRational {
    fn one() -> Self {
        DyadicRational {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }
}

impl Add<&DyadicRational> for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        DyadicRational::new(a + b, e)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Mul<&DyadicRational> for &DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(
            &self.numerator * &rhs.numerator,
            self.exponent + rhs.exponent,
        )
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: DyadicRational) -> DyadicRational {
        &self * &rhs
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `a`, `a/b` with `b` a power of two, or `a/2^e`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::parse(1, 1, format!("{msg}: {s:?}"));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            None => (s, None),
            Some((n, d)) => (n, Some(d)),
        };
        let numerator: BigUint = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let exponent = match den.map(str::trim) {
            None => 0,
            Some(d) => {
                if let Some(e) = d.strip_prefix("2^") {
                    e.parse::<u64>().map_err(|_| bad("bad exponent"))?
                } else {
                    let d: BigUint = d.parse().map_err(|_| bad("bad denominator"))?;
                    if d.is_zero() || d.count_ones() != 1 {
                        return Err(bad("denominator is not a power of two"));
                    }
                    d.trailing_zeros().unwrap_or(0)
                }
            }
        };
        Ok(Self::new(numerator, exponent))
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

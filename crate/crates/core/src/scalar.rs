//! Exact probability scalars.
//!
//! Evaluation, Bernoulli tails and the fat-word probability are written once
//! against [`Probability`] and instantiated with [`DyadicRational`] (the
//! default) or [`BigRational`] (used as an independent cross-check route).

use std::fmt::Debug;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dyadic::DyadicRational;

pub trait Probability:
    Clone + Debug + PartialOrd + Zero + One + Add<Output = Self> + Mul<Output = Self> + Send + Sync
{
    fn half(&self) -> Self;

    /// `1 - self`. Callers only pass values in `[0, 1]`.
    fn complement(&self) -> Self;

    fn from_dyadic(value: &DyadicRational) -> Self;

    fn to_rational(&self) -> BigRational;

    fn from_bit(bit: bool) -> Self {
        if bit {
            Self::one()
        } else {
            Self::zero()
        }
    }
}

impl Probability for DyadicRational {
    fn half(&self) -> Self {
        DyadicRational::half(self)
    }

    fn complement(&self) -> Self {
        self.one_minus().expect("probability above one")
    }

    fn from_dyadic(value: &DyadicRational) -> Self {
        value.clone()
    }

    fn to_rational(&self) -> BigRational {
        DyadicRational::to_rational(self)
    }
}

impl Probability for BigRational {
    fn half(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }

    fn complement(&self) -> Self {
        BigRational::one() - self
    }

    fn from_dyadic(value: &DyadicRational) -> Self {
        value.to_rational()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

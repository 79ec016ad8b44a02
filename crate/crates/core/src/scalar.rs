use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Field elements the engine can evaluate polynomials over.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for BigRational {
    fn zero_value() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one_value() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
}

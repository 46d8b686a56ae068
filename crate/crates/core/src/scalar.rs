use std::fmt::Debug;

use num_traits::{Num, Signed};

use crate::Rational;

/// Numeric type the estimators are computed in.
///
/// Only field operations and an ordering are required, which is what lets
/// the exact [`Rational`] type stand in for floating point.
pub trait Scalar: Num + Signed + Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self;

    /// Nearest representable value, `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(self) -> f64;

    /// `false` for NaN.
    fn is_non_negative(self) -> bool {
        self >= Self::zero()
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational {
    fn from_count(n: usize) -> Self {
        Rational::from_integer(n as i128)
    }

    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        Rational::approximate_float(x)
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

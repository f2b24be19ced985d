use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type the cost and dynamics code is written against.
///
/// Implemented by plain `f64` (fast evaluation, finite differences) and by
/// tape variables (gradients of any order). Every routine that should be
/// differentiable is generic over `Scalar`, so both paths share one
/// definition of the math.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(self) -> f64;

    /// A constant living in the same context as `self`.
    fn lift(self, c: f64) -> Self;

    fn exp(self) -> Self;
    fn sigmoid(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn lift(self, c: f64) -> Self {
        c
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sum of a slice, left to right. Returns `zero` for an empty slice.
pub fn sum<T: Scalar>(xs: &[T], zero: T) -> T {
    let mut it = xs.iter().copied();
    match it.next() {
        Some(first) => it.fold(first, |acc, x| acc + x),
        None => zero,
    }
}

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Result;

/// Exact field arithmetic shared by `FieldElement` and `Rational`.
///
/// Identities are obtained from an existing value (`zero_of`, `one_of`) so
/// that scalars carrying runtime context, such as a prime modulus, can
/// produce identities of the same field.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Additive identity of the same field as `self`.
    fn zero_of(&self) -> Self;

    /// Multiplicative identity of the same field as `self`.
    fn one_of(&self) -> Self;

    fn is_zero(&self) -> bool;

    /// Multiplicative inverse; errors on zero.
    fn inv(&self) -> Result<Self>;
}

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The prime field GF(p), identified by its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Errors with `CompositeModulus` unless `p` is prime.
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(PrimeField { p })
        } else {
            Err(Error::CompositeModulus(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduce an arbitrary integer to its canonical residue in `0..p`.
    pub fn element(&self, n: i64) -> FieldElement {
        let value = (n as i128).rem_euclid(self.p as i128) as u64;
        FieldElement { value, field: *self }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// All field elements in residue order `0, 1, ..., p-1`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + use<> {
        let field = *self;
        (0..self.p).map(move |value| FieldElement { value, field })
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of GF(p), stored as the canonical residue in `0..p`.
///
/// The arithmetic operators panic when mixing fields; use the `try_`
/// variants to get a `FieldMismatch` error instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    fn same_field(&self, rhs: &Self) -> Result<PrimeField> {
        if self.field == rhs.field {
            Ok(self.field)
        } else {
            Err(Error::FieldMismatch {
                left: self.field.p,
                right: rhs.field.p,
            })
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        let field = self.same_field(&rhs)?;
        Ok(FieldElement {
            value: (self.value + rhs.value) % field.p,
            field,
        })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self> {
        let field = self.same_field(&rhs)?;
        Ok(FieldElement {
            value: (self.value + field.p - rhs.value) % field.p,
            field,
        })
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self> {
        let field = self.same_field(&rhs)?;
        let value = ((self.value as u128 * rhs.value as u128) % field.p as u128) as u64;
        Ok(FieldElement { value, field })
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inverse(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        let p = self.field.p as i128;
        let (mut r0, mut r1) = (p, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, so gcd with a nonzero residue is 1");
        Ok(FieldElement {
            value: t0.rem_euclid(p) as u64,
            field: self.field,
        })
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in +")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in -")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in *")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        FieldElement {
            value: (self.field.p - self.value) % self.field.p,
            field: self.field,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Scalar for FieldElement {
    fn zero_of(&self) -> Self {
        self.field.zero()
    }

    fn one_of(&self) -> Self {
        self.field.one()
    }

    fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn inv(&self) -> Result<Self> {
        self.inverse()
    }
}

//! The algebra of functions on two points, k ⊕ k, with the flip involution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::rational_to_f64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPointFn {
    pub value_x: BigRational,
    pub value_y: BigRational,
}

impl TwoPointFn {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        TwoPointFn { value_x: x, value_y: y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(x)),
            BigRational::from_integer(BigInt::from(y)),
        )
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::new(BigRational::one(), BigRational::one())
    }

    /// The flip involution f̄(x) = f(y).
    pub fn bar(&self) -> Self {
        Self::new(self.value_y.clone(), self.value_x.clone())
    }

    /// m-fold bar: identity for even m, flip for odd m.
    pub fn bar_pow(&self, m: usize) -> Self {
        if m % 2 == 0 {
            self.clone()
        } else {
            self.bar()
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.value_x + &o.value_x, &self.value_y + &o.value_y)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.value_x - &o.value_x, &self.value_y - &o.value_y)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.value_x * &o.value_x, &self.value_y * &o.value_y)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.value_x.clone(), -self.value_y.clone())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(&self.value_x * q, &self.value_y * q)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.value_x.is_zero() || self.value_y.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self::new(
            BigRational::one() / &self.value_x,
            BigRational::one() / &self.value_y,
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.value_x.is_zero() && self.value_y.is_zero()
    }

    pub fn residual_norm(&self) -> f64 {
        rational_to_f64(&self.value_x.abs()).max(rational_to_f64(&self.value_y.abs()))
    }

    pub fn render(&self) -> String {
        format!("({}, {})", self.value_x, self.value_y)
    }
}

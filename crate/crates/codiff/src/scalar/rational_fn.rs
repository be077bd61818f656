//! Rational functions over the chart variables, kept in canonical form:
//! gcd(numerator, denominator) a unit, denominator monic under graded lex.

use num_rational::BigRational;
use num_traits::One;

use super::poly::MultiPoly;
use super::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RationalFn {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            return RationalFn { den: MultiPoly::one(num.nvars), num };
        }
        let (mut num, mut den) = (num, den);
        if den.as_constant().is_none() {
            let g = MultiPoly::gcd(&num, &den);
            if g.as_constant().is_none() {
                num = num.exact_div(&g).expect("gcd divides numerator");
                den = den.exact_div(&g).expect("gcd divides denominator");
            }
        }
        // Monic denominator.
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            den = den.scale(&inv);
            num = num.scale(&inv);
        }
        RationalFn { num, den }
    }

    pub fn from_poly_parts(p: MultiPoly) -> Self {
        RationalFn { den: MultiPoly::one(p.nvars), num: p }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::from_poly_parts(MultiPoly::constant(nvars, c))
    }

    pub fn from_int(nvars: usize, n: i64) -> Self {
        Self::from_poly_parts(MultiPoly::from_int(nvars, n))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_poly_parts(MultiPoly::var(nvars, i))
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }
}

impl Scalar for RationalFn {
    fn zero_like(&self) -> Self {
        Self::from_poly_parts(MultiPoly::zero(self.num.nvars))
    }

    fn one_like(&self) -> Self {
        Self::from_poly_parts(MultiPoly::one(self.num.nvars))
    }

    fn add(&self, other: &Self) -> Result<Self> {
        if self.num.nvars != other.num.nvars {
            return Err(Error::MixedRing("different variable counts".into()));
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Ok(Self::reduced(num, den))
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        if self.num.nvars != other.num.nvars {
            return Err(Error::MixedRing("different variable counts".into()));
        }
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        Ok(Self::reduced(num, den))
    }

    fn neg(&self) -> Self {
        RationalFn { num: self.num.neg(), den: self.den.clone() }
    }

    fn inverse(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }

    fn partial(&self, var: usize) -> Result<Self> {
        // (n/d)' = (n'd - nd')/d^2
        let num = self
            .num
            .partial(var)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.partial(var)));
        let den = self.den.mul(&self.den);
        Ok(Self::reduced(num, den))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn scale(&self, q: &BigRational) -> Self {
        Self::reduced(self.num.scale(q), self.den.clone())
    }

    fn sqrt(&self) -> Result<Self> {
        // Only constants with an exact rational square root are supported on
        // the exact backend; this covers flat metrics (det = 1). Anything
        // else must use the jet backend.
        let c = self
            .as_constant()
            .ok_or_else(|| Error::SqrtUnavailable("non-constant determinant on exact backend".into()))?;
        if c < BigRational::from_integer(0.into()) {
            return Err(Error::NotPositive);
        }
        let num = c.numer().sqrt();
        let den = c.denom().sqrt();
        let root = BigRational::new(num.clone(), den.clone());
        if &root * &root == c {
            Ok(Self::constant(self.num.nvars, root))
        } else {
            Err(Error::SqrtUnavailable("constant is not a perfect square".into()))
        }
    }

    fn nvars(&self) -> usize {
        self.num.nvars
    }

    fn from_poly(&self, p: &MultiPoly) -> Self {
        Self::from_poly_parts(p.clone())
    }

    fn residual_norm(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.num.max_abs_coeff().max(1.0)
        }
    }

    fn render(&self, names: &[String]) -> String {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            self.num.render(names)
        } else {
            format!("({}) / ({})", self.num.render(names), self.den.render(names))
        }
    }
}

//! Coefficient rings: rational functions, truncated jets, two-point functions.

pub mod jet;
pub mod poly;
pub mod rational_fn;
pub mod two_point;

pub use jet::Jet;
pub use poly::{rational_to_f64, Mono, MultiPoly};
pub use rational_fn::RationalFn;
pub use two_point::TwoPointFn;

use num_rational::BigRational;

use crate::error::Result;

/// Common interface of the coefficient rings that carry derivations
/// (rational functions and jets). Every value knows its own ring instance,
/// so `zero_like`/`one_like` produce compatible elements.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn inverse(&self) -> Result<Self>;
    fn partial(&self, var: usize) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn scale(&self, q: &BigRational) -> Self;
    fn sqrt(&self) -> Result<Self>;
    fn nvars(&self) -> usize;
    /// Jet-expand (rational backend: embed) a polynomial in the chart
    /// variables into this value's ring instance.
    fn from_poly(&self, p: &MultiPoly) -> Self;
    /// Magnitude used in residual reports: 0 iff is_zero; for jets the
    /// largest coefficient magnitude.
    fn residual_norm(&self) -> f64;
    fn render(&self, names: &[String]) -> String;
}

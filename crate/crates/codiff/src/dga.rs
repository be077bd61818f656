//! Abstract interface for a graded differential algebra, used by the
//! central-extension and semidirect-product constructions so they can run
//! over classical exterior algebras and over noncommutative hosts alike.

use num_rational::BigRational;

use crate::error::Result;
use crate::forms::{Chart, Form};
use crate::scalar::Scalar;

/// A graded differential algebra with a chosen degree grading, product,
/// and differential. Elements may be inhomogeneous; `homogeneous_parts`
/// splits them by degree.
pub trait Dga {
    type Elem: Clone + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn d(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn scale(&self, a: &Self::Elem, q: &BigRational) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn residual_norm(&self, a: &Self::Elem) -> f64;
    /// Nonzero homogeneous components paired with their degrees.
    fn homogeneous_parts(&self, a: &Self::Elem) -> Vec<(usize, Self::Elem)>;
    fn render(&self, a: &Self::Elem) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.add(a, &self.neg(b))
    }

    /// Degree of a homogeneous element; `None` for zero or mixed degree.
    fn degree(&self, a: &Self::Elem) -> Option<usize> {
        let parts = self.homogeneous_parts(a);
        if parts.len() == 1 {
            Some(parts[0].0)
        } else {
            None
        }
    }
}

/// Classical exterior algebra on `n` coordinates over a scalar ring `S`.
pub struct ClassicalForms<S: Scalar> {
    pub n: usize,
    pub exemplar: S,
    pub chart: Chart,
}

impl<S: Scalar> ClassicalForms<S> {
    pub fn new(n: usize, exemplar: S, chart: Chart) -> Self {
        ClassicalForms { n, exemplar, chart }
    }
}

impl<S: Scalar> Dga for ClassicalForms<S> {
    type Elem = Form<S>;

    fn zero(&self) -> Form<S> {
        Form::zero(self.n)
    }

    fn one(&self) -> Form<S> {
        Form::scalar(self.n, self.exemplar.one_like())
    }

    fn add(&self, a: &Form<S>, b: &Form<S>) -> Result<Form<S>> {
        a.add(b)
    }

    fn neg(&self, a: &Form<S>) -> Form<S> {
        a.neg()
    }

    fn mul(&self, a: &Form<S>, b: &Form<S>) -> Result<Form<S>> {
        a.wedge(b)
    }

    fn d(&self, a: &Form<S>) -> Result<Form<S>> {
        a.exterior_d()
    }

    fn scale(&self, a: &Form<S>, q: &BigRational) -> Form<S> {
        a.scale(q)
    }

    fn is_zero(&self, a: &Form<S>) -> bool {
        a.is_zero()
    }

    fn residual_norm(&self, a: &Form<S>) -> f64 {
        a.residual_norm()
    }

    fn homogeneous_parts(&self, a: &Form<S>) -> Vec<(usize, Form<S>)> {
        a.homogeneous_parts()
    }

    fn render(&self, a: &Form<S>) -> String {
        a.render(&self.chart)
    }
}

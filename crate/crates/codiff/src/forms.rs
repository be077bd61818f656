//! Graded-commutative exterior algebra over an n-coordinate chart.
//!
//! Forms are stored as maps from strictly increasing multi-indices (encoded
//! as bitmasks) to scalars; wedge signs come from the merge permutation
//! parity, so values are always in canonical form.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{MultiPoly, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub n: usize,
    pub coords: Vec<String>,
}

impl Chart {
    pub fn new(coords: Vec<String>) -> Self {
        Chart { n: coords.len(), coords }
    }
}

/// Number of transpositions needed to merge two disjoint sorted index sets.
pub fn merge_sign(a: u32, b: u32) -> i32 {
    let mut inversions = 0u32;
    let mut bits = b;
    while bits != 0 {
        let i = bits.trailing_zeros();
        bits &= bits - 1;
        inversions += (a >> (i + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Form<S: Scalar> {
    pub n: usize,
    pub terms: BTreeMap<u32, S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize) -> Self {
        Form { n, terms: BTreeMap::new() }
    }

    /// Degree-0 form from a scalar.
    pub fn scalar(n: usize, s: S) -> Self {
        let mut f = Self::zero(n);
        f.add_term(0, s);
        f
    }

    /// Basis monomial `c · dx^mask`.
    pub fn monomial(n: usize, mask: u32, c: S) -> Self {
        let mut f = Self::zero(n);
        f.add_term(mask, c);
        f
    }

    pub fn basis_one_form(n: usize, i: usize, exemplar: &S) -> Self {
        Self::monomial(n, 1 << i, exemplar.one_like())
    }

    pub fn add_term(&mut self, mask: u32, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(existing) => {
                let sum = existing.add(&c).expect("same ring");
                if sum.is_zero() {
                    self.terms.remove(&mask);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Some(degree) if homogeneous (zero counts as homogeneous of any
    /// degree and reports None).
    pub fn degree(&self) -> Option<usize> {
        let mut deg = None;
        for mask in self.terms.keys() {
            let d = mask.count_ones() as usize;
            match deg {
                None => deg = Some(d),
                Some(existing) if existing != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn homogeneous_parts(&self) -> Vec<(usize, Form<S>)> {
        let mut parts: BTreeMap<usize, Form<S>> = BTreeMap::new();
        for (mask, c) in &self.terms {
            let d = mask.count_ones() as usize;
            parts
                .entry(d)
                .or_insert_with(|| Form::zero(self.n))
                .add_term(*mask, c.clone());
        }
        parts.into_iter().collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ChartMismatch("form dimensions differ".into()));
        }
        let mut out = self.clone();
        for (mask, c) in &other.terms {
            out.add_term(*mask, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ChartMismatch("form dimensions differ".into()));
        }
        let mut out = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(*ma, *mb);
                let mut c = ca.mul(cb)?;
                if sign < 0 {
                    c = c.neg();
                }
                out.add_term(ma | mb, c);
            }
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, s: &S) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (mask, c) in &self.terms {
            out.add_term(*mask, s.mul(c)?);
        }
        Ok(out)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Self::zero(self.n);
        for (mask, c) in &self.terms {
            out.add_term(*mask, c.scale(q));
        }
        out
    }

    pub fn exterior_d(&self) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (mask, c) in &self.terms {
            for i in 0..self.n {
                let bit = 1u32 << i;
                if mask & bit != 0 {
                    continue;
                }
                let p = c.partial(i)?;
                if p.is_zero() {
                    continue;
                }
                // Sign of sorting dx^i into dx^mask: one transposition per
                // index of mask below i.
                let below = (mask & (bit - 1)).count_ones();
                let signed = if below % 2 == 0 { p } else { p.neg() };
                out.add_term(mask | bit, signed);
            }
        }
        Ok(out)
    }

    /// Coordinate interior product ι_{∂_i}, a degree −1 graded-derivation.
    pub fn contract(&self, i: usize) -> Self {
        let bit = 1u32 << i;
        let mut out = Self::zero(self.n);
        for (mask, c) in &self.terms {
            if mask & bit == 0 {
                continue;
            }
            let below = (mask & (bit - 1)).count_ones();
            let signed = if below % 2 == 0 { c.clone() } else { c.neg() };
            out.add_term(mask & !bit, signed);
        }
        out
    }

    pub fn residual_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.residual_norm())
            .fold(0.0, f64::max)
    }

    /// Coefficient of dx^mask (zero_like if absent); requires a nonzero
    /// exemplar to produce zero.
    pub fn coeff(&self, mask: u32, exemplar: &S) -> S {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| exemplar.zero_like())
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (mask, c) in &self.terms {
            let mut basis = Vec::new();
            for i in 0..self.n {
                if mask & (1 << i) != 0 {
                    basis.push(format!("d{}", chart.coords[i]));
                }
            }
            let coeff = c.render(&chart.coords);
            if basis.is_empty() {
                parts.push(coeff);
            } else if coeff == "1" {
                parts.push(basis.join("∧"));
            } else {
                parts.push(format!("({}) {}", coeff, basis.join("∧")));
            }
        }
        parts.join(" + ")
    }
}

/// L_B(ω,η) = B(ωη) − (Bω)η − (−1)^{d·|ω|} ω(Bη) for a degree-d map B.
/// Mixed-degree ω is decomposed into homogeneous parts and recombined.
pub fn leibnizator<S: Scalar>(
    b: &dyn Fn(&Form<S>) -> Result<Form<S>>,
    b_degree: i64,
    omega: &Form<S>,
    eta: &Form<S>,
) -> Result<Form<S>> {
    let b_eta = b(eta)?;
    let mut out = Form::zero(omega.n);
    for (deg, part) in omega.homogeneous_parts() {
        let first = b(&part.wedge(eta)?)?;
        let second = b(&part)?.wedge(eta)?;
        let mut third = part.wedge(&b_eta)?;
        if (b_degree * deg as i64) % 2 != 0 {
            third = third.neg();
        }
        out = out.add(&first.sub(&second)?.sub(&third)?)?;
    }
    Ok(out)
}

/// Element of Ω¹ ⊗_A Ω¹ in component form t_ij dx^i ⊗ dx^j.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorForm<S: Scalar> {
    pub n: usize,
    pub entries: Vec<Vec<S>>,
}

impl<S: Scalar> TensorForm<S> {
    pub fn zero(n: usize, exemplar: &S) -> Self {
        TensorForm {
            n,
            entries: vec![vec![exemplar.zero_like(); n]; n],
        }
    }

    /// Normal form of a sum of pairs of 1-forms; scalar coefficients are
    /// pulled into the components, so middle-linearity holds by
    /// construction.
    pub fn from_pairs(n: usize, pairs: &[(Form<S>, Form<S>)], exemplar: &S) -> Result<Self> {
        let mut out = Self::zero(n, exemplar);
        for (a, b) in pairs {
            if a.degree().unwrap_or(1) != 1 || b.degree().unwrap_or(1) != 1 {
                return Err(Error::DegreeError("tensor factors must be 1-forms".into()));
            }
            for i in 0..n {
                let ai = a.coeff(1 << i, exemplar);
                if ai.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let bj = b.coeff(1 << j, exemplar);
                    if bj.is_zero() {
                        continue;
                    }
                    out.entries[i][j] = out.entries[i][j].add(&ai.mul(&bj)?)?;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] = out.entries[i][j].add(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] = out.entries[i][j].sub(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.scale(q);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn residual_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.residual_norm())
            .fold(0.0, f64::max)
    }
}

/// Random polynomial of total degree ≤ max_deg with small integer
/// coefficients.
pub fn random_poly<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32) -> MultiPoly {
    let mut p = MultiPoly::zero(nvars);
    let nterms = rng.gen_range(1..=3);
    for _ in 0..nterms {
        let c: i64 = rng.gen_range(-3..=3);
        let mut term = MultiPoly::from_int(nvars, c);
        let mut budget = max_deg;
        for i in 0..nvars {
            let e = rng.gen_range(0..=budget.min(2));
            budget -= e;
            if e > 0 {
                term = term.mul(&MultiPoly::var(nvars, i).pow(e));
            }
        }
        p = p.add(&term);
    }
    p
}

/// Random homogeneous form of the given degree with degree-≤2 polynomial
/// coefficients, expanded into the exemplar's ring.
pub fn random_form<S: Scalar, R: Rng>(
    rng: &mut R,
    n: usize,
    degree: usize,
    exemplar: &S,
) -> Form<S> {
    let mut out = Form::zero(n);
    let masks: Vec<u32> = (0..(1u32 << n)).filter(|m| m.count_ones() as usize == degree).collect();
    for mask in masks {
        if rng.gen_bool(0.7) {
            let p = random_poly(rng, n, 2);
            out.add_term(mask, exemplar.from_poly(&p));
        }
    }
    out
}

pub fn random_scalar<S: Scalar, R: Rng>(rng: &mut R, n: usize, exemplar: &S) -> S {
    exemplar.from_poly(&random_poly(rng, n, 2))
}

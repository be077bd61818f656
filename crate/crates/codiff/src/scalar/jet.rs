//! Truncated multivariate Taylor jets at a rational base point.
//!
//! Coefficients are high-precision rationals: after every operation that can
//! compound (products, series), coefficients are rounded to a fixed decimal
//! grid of 10^-48, far below the ε_jet = 10^-20 zero-test tolerance.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;

use super::poly::{rational_to_f64, Mono, MultiPoly};
use super::Scalar;
use crate::error::{Error, Result};

const PREC_DIGITS: u32 = 48;
const SERIES_DIGITS: u32 = 80;

static PREC_DEN: Lazy<BigInt> = Lazy::new(|| BigInt::from(10u32).pow(PREC_DIGITS));
static SERIES_EPS: Lazy<BigRational> = Lazy::new(|| {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(SERIES_DIGITS))
});
static EPS_JET: Lazy<BigRational> =
    Lazy::new(|| BigRational::new(BigInt::one(), BigInt::from(10u32).pow(20)));

fn round_q(r: &BigRational) -> BigRational {
    // Round to the nearest multiple of 10^-PREC_DIGITS.
    let scaled = r * BigRational::from_integer(PREC_DEN.clone());
    let rounded = scaled.round().to_integer();
    BigRational::new(rounded, PREC_DEN.clone())
}

/// Taylor coefficients of f(base + u) as a polynomial in u, truncated to
/// total degree `order`.
#[derive(Debug, Clone)]
pub struct Jet {
    pub order: u32,
    pub base: Vec<BigRational>,
    pub coeffs: BTreeMap<Mono, BigRational>,
}

impl Jet {
    pub fn zero(base: Vec<BigRational>, order: u32) -> Self {
        Jet { order, base, coeffs: BTreeMap::new() }
    }

    pub fn constant(base: Vec<BigRational>, order: u32, c: BigRational) -> Self {
        let mut j = Self::zero(base, order);
        if !c.is_zero() {
            let n = j.base.len();
            j.coeffs.insert(Mono(vec![0; n]), c);
        }
        j
    }

    pub fn var(base: Vec<BigRational>, order: u32, i: usize) -> Self {
        let n = base.len();
        let mut j = Self::constant(base.clone(), order, base[i].clone());
        if order >= 1 {
            let mut exps = vec![0u16; n];
            exps[i] = 1;
            j.coeffs.insert(Mono(exps), BigRational::one());
        }
        j
    }

    fn insert(&mut self, m: Mono, c: BigRational) {
        if m.total_degree() > self.order || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            // Keep the map free of structural zeros.
        }
    }

    fn cleanup(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    fn rounded(mut self) -> Self {
        for c in self.coeffs.values_mut() {
            *c = round_q(c);
        }
        self.cleanup()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.base != other.base {
            return Err(Error::MixedRing("jet base points differ".into()));
        }
        Ok(())
    }

    fn truncated(&self, order: u32) -> Self {
        let mut out = Self::zero(self.base.clone(), order);
        for (m, c) in &self.coeffs {
            if m.total_degree() <= order {
                out.coeffs.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn constant_term(&self) -> BigRational {
        let n = self.base.len();
        self.coeffs
            .get(&Mono(vec![0; n]))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Multiply by a series in the order-nilpotent part of `inner`,
    /// with coefficients produced by `coeff(k)`.
    fn compose_series<F: Fn(u32) -> BigRational>(&self, coeff: F) -> Self {
        // self must have zero constant term; computes sum coeff(k) self^k.
        let mut acc = Self::constant(self.base.clone(), self.order, coeff(0));
        let mut power = Self::constant(self.base.clone(), self.order, BigRational::one());
        for k in 1..=self.order {
            power = power.mul_raw(self);
            if power.coeffs.is_empty() {
                break;
            }
            acc = acc.add_raw(&power.scale_raw(&coeff(k)));
        }
        acc.rounded()
    }

    fn nilpotent_part(&self) -> Self {
        let mut out = self.clone();
        let n = self.base.len();
        out.coeffs.remove(&Mono(vec![0; n]));
        out
    }

    fn add_raw(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = self.truncated(order);
        for (m, c) in &other.coeffs {
            if m.total_degree() <= order {
                out.insert(m.clone(), c.clone());
            }
        }
        out.cleanup()
    }

    fn mul_raw(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.base.clone(), order);
        for (ma, ca) in &self.coeffs {
            if ma.total_degree() > order {
                continue;
            }
            for (mb, cb) in &other.coeffs {
                if ma.total_degree() + mb.total_degree() > order {
                    continue;
                }
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out.cleanup()
    }

    fn scale_raw(&self, q: &BigRational) -> Self {
        let mut out = Self::zero(self.base.clone(), self.order);
        if q.is_zero() {
            return out;
        }
        for (m, c) in &self.coeffs {
            out.coeffs.insert(m.clone(), c * q);
        }
        out
    }

    pub fn sin(&self) -> Self {
        let c0 = self.constant_term();
        let (s, c) = sin_cos_q(&c0);
        let u = self.nilpotent_part();
        // sin(c0+u) = sin(c0) cos(u) + cos(c0) sin(u)
        let cos_u = u.compose_series(|k| trig_coeff(k, false));
        let sin_u = u.compose_series(|k| trig_coeff(k, true));
        cos_u.scale_raw(&s).add_raw(&sin_u.scale_raw(&c)).rounded()
    }

    pub fn cos(&self) -> Self {
        let c0 = self.constant_term();
        let (s, c) = sin_cos_q(&c0);
        let u = self.nilpotent_part();
        let cos_u = u.compose_series(|k| trig_coeff(k, false));
        let sin_u = u.compose_series(|k| trig_coeff(k, true));
        cos_u.scale_raw(&c).add_raw(&sin_u.scale_raw(&(-s))).rounded()
    }

    pub fn exp(&self) -> Self {
        let c0 = self.constant_term();
        let e = exp_q(&c0);
        let u = self.nilpotent_part();
        let exp_u = u.compose_series(factorial_inverse);
        exp_u.scale_raw(&e).rounded()
    }
}

fn factorial_inverse(k: u32) -> BigRational {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= BigInt::from(i);
    }
    BigRational::new(BigInt::one(), f)
}

fn trig_coeff(k: u32, odd: bool) -> BigRational {
    // Taylor coefficients of sin (odd) / cos (even) around 0.
    if odd != (k % 2 == 1) {
        return BigRational::zero();
    }
    let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
    factorial_inverse(k) * BigRational::from_integer(BigInt::from(sign))
}

/// sin and cos of a rational argument via Taylor series to SERIES_DIGITS.
fn sin_cos_q(x: &BigRational) -> (BigRational, BigRational) {
    let mut sin = BigRational::zero();
    let mut cos = BigRational::zero();
    let mut term = BigRational::one(); // x^k / k!
    let mut k: u32 = 0;
    loop {
        match k % 4 {
            0 => cos += &term,
            1 => sin += &term,
            2 => cos -= &term,
            _ => sin -= &term,
        }
        k += 1;
        term = term * x / BigRational::from_integer(BigInt::from(k));
        if term.abs() < *SERIES_EPS && k > 4 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    (round_q(&sin), round_q(&cos))
}

fn exp_q(x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut term = BigRational::one();
    let mut k: u32 = 0;
    loop {
        acc += &term;
        k += 1;
        term = term * x / BigRational::from_integer(BigInt::from(k));
        if term.abs() < *SERIES_EPS && k > 4 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    round_q(&acc)
}

/// Square root of a positive rational via Newton iteration.
fn sqrt_q(x: &BigRational) -> BigRational {
    assert!(x.is_positive());
    let mut y = BigRational::from_float(rational_to_f64(x).sqrt().max(f64::MIN_POSITIVE))
        .unwrap_or_else(BigRational::one);
    if y.is_zero() || y.is_negative() {
        y = BigRational::one();
    }
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..8 {
        y = (&y + x / &y) / &two;
        y = round_to(&y, SERIES_DIGITS);
    }
    y
}

fn round_to(r: &BigRational, digits: u32) -> BigRational {
    let den = BigInt::from(10u32).pow(digits);
    let scaled = r * BigRational::from_integer(den.clone());
    BigRational::new(scaled.round().to_integer(), den)
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        if self.base != other.base {
            return false;
        }
        match self.sub(other) {
            Ok(d) => Scalar::is_zero(&d),
            Err(_) => false,
        }
    }
}

impl Scalar for Jet {
    fn zero_like(&self) -> Self {
        Self::zero(self.base.clone(), self.order)
    }

    fn one_like(&self) -> Self {
        Self::constant(self.base.clone(), self.order, BigRational::one())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.add_raw(other))
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.add_raw(&other.neg()))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_raw(other).rounded())
    }

    fn neg(&self) -> Self {
        self.scale_raw(&BigRational::from_integer(BigInt::from(-1)))
    }

    fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.abs() <= *EPS_JET {
            return Err(Error::NotInvertible);
        }
        // a = c0 (1 - u), u nilpotent: 1/a = (1/c0) sum u^k.
        let inv_c0 = BigRational::one() / &c0;
        let u = self
            .nilpotent_part()
            .scale_raw(&(-inv_c0.clone()));
        let series = u.compose_series(|_| BigRational::one());
        Ok(series.scale_raw(&inv_c0).rounded())
    }

    fn partial(&self, var: usize) -> Result<Self> {
        let order = self.order.saturating_sub(1);
        let mut out = Self::zero(self.base.clone(), order);
        for (m, c) in &self.coeffs {
            let e = m.0[var];
            if e > 0 {
                let mut exps = m.0.clone();
                exps[var] = e - 1;
                out.insert(Mono(exps), c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        Ok(out.cleanup())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.abs() <= *EPS_JET)
    }

    fn scale(&self, q: &BigRational) -> Self {
        self.scale_raw(q).rounded()
    }

    fn sqrt(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_positive() || c0 <= *EPS_JET {
            return Err(Error::NotPositive);
        }
        let s0 = sqrt_q(&c0);
        // sqrt(c0 (1+v)) = s0 * sum binom(1/2, k) v^k
        let v = self.nilpotent_part().scale_raw(&(BigRational::one() / &c0));
        let series = v.compose_series(binom_half);
        Ok(series.scale_raw(&s0).rounded())
    }

    fn nvars(&self) -> usize {
        self.base.len()
    }

    fn from_poly(&self, p: &MultiPoly) -> Self {
        let mut acc = Self::zero(self.base.clone(), self.order);
        for (m, c) in &p.terms {
            let mut t = Self::constant(self.base.clone(), self.order, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                let v = Self::var(self.base.clone(), self.order, i);
                for _ in 0..e {
                    t = t.mul_raw(&v);
                }
            }
            acc = acc.add_raw(&t);
        }
        acc.rounded()
    }

    fn residual_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| rational_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }

    fn render(&self, names: &[String]) -> String {
        if Scalar::is_zero(self) {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.coeffs {
            if c.abs() <= *EPS_JET {
                continue;
            }
            let mut factors = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let name = format!("u_{}", names.get(i).cloned().unwrap_or_else(|| i.to_string()));
                    factors.push(if e == 1 { name } else { format!("{}^{}", name, e) });
                }
            }
            let v = rational_to_f64(c);
            if factors.is_empty() {
                parts.push(format!("{:.12}", v));
            } else {
                parts.push(format!("{:.12}*{}", v, factors.join("*")));
            }
        }
        parts.join(" + ")
    }
}

fn binom_half(k: u32) -> BigRational {
    // binom(1/2, k)
    let mut acc = BigRational::one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for i in 0..k {
        let factor = (&half - BigRational::from_integer(BigInt::from(i)))
            / BigRational::from_integer(BigInt::from(i + 1));
        acc *= factor;
    }
    acc
}

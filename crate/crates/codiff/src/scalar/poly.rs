//! Multivariate polynomials over the rationals with graded-lex ordering.
//!
//! This is the kernel underneath `RationalFn`: exact arithmetic, exact
//! division, and a primitive-PRS gcd so rational functions stay in canonical
//! (fully reduced) form.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Mono, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Mono(vec![0; nvars]), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn from_int(nvars: usize, n: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0u16; nvars];
        exps[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(Mono(exps), BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.total_degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Leading term under graded lex.
    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn insert_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut exps = m.0.clone();
                exps[i] = e - 1;
                out.insert_term(Mono(exps), c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact division; `None` unless `d` divides `self` exactly.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero());
        if self.is_zero() {
            return Some(Self::zero(self.nvars));
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(BigRational::one() / c)));
        }
        let (dm, dc) = d.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading() {
            if !dm.divides(rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc / &dc;
            let mut qt = Self::zero(self.nvars);
            qt.terms.insert(qm, qc);
            rem = rem.sub(&qt.mul(d));
            quot = quot.add(&qt);
        }
        Some(quot)
    }

    fn deg_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    fn max_var_present(&self) -> Option<usize> {
        let mut best = None;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    best = Some(best.map_or(i, |b: usize| b.max(i)));
                }
            }
        }
        best
    }

    /// Coefficients of v^0..v^deg, each with the v exponent removed.
    fn as_univar(&self, v: usize) -> Vec<MultiPoly> {
        let d = self.deg_in(v) as usize;
        let mut coeffs = vec![Self::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[v] as usize;
            let mut exps = m.0.clone();
            exps[v] = 0;
            coeffs[e].insert_term(Mono(exps), c.clone());
        }
        coeffs
    }

    /// Normalize so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = BigRational::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    fn content_in(&self, v: usize) -> MultiPoly {
        let coeffs = self.as_univar(v);
        let mut g = Self::zero(self.nvars);
        for c in &coeffs {
            if !c.is_zero() {
                g = Self::gcd(&g, c);
            }
        }
        g
    }

    fn primitive_in(&self, v: usize) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let cont = self.content_in(v);
        self.exact_div(&cont).expect("content divides")
    }

    /// Pseudo-remainder of `f` by `g` viewed as univariate in `v`.
    fn prem(f: &MultiPoly, g: &MultiPoly, v: usize) -> MultiPoly {
        let dg = g.deg_in(v);
        let lcg_vec = g.as_univar(v);
        let lcg = lcg_vec.last().unwrap().clone();
        let mut r = f.clone();
        while !r.is_zero() && r.deg_in(v) >= dg {
            let dr = r.deg_in(v);
            let rv = r.as_univar(v);
            let lr = rv.last().unwrap().clone();
            // r <- lcg*r - lr * v^(dr-dg) * g
            let mut shift = vec![0u16; f.nvars];
            shift[v] = dr - dg;
            let mut shift_poly = Self::zero(f.nvars);
            shift_poly.terms.insert(Mono(shift), BigRational::one());
            r = r.mul(&lcg).sub(&g.mul(&lr).mul(&shift_poly));
        }
        r
    }

    /// Largest absolute value over the integer coefficients.
    fn max_norm(&self) -> BigInt {
        let mut best = BigInt::zero();
        for c in self.terms.values() {
            let a = c.numer().abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Clear denominators and integer content: a primitive integer
    /// polynomial that is a rational multiple of `self`.
    fn integer_primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = num_integer::lcm(lcm, c.denom().clone());
        }
        let mut content = BigInt::zero();
        let scaled: Vec<(Mono, BigInt)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.numer() * &lcm / c.denom()))
            .collect();
        for (_, c) in &scaled {
            content = num_integer::gcd(content, c.clone());
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in scaled {
            out.terms.insert(m, BigRational::from_integer(c / &content));
        }
        out
    }

    /// Evaluate at `x_v = xi`, leaving a polynomial in the other variables.
    fn eval_var(&self, v: usize, xi: &BigInt) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[v];
            let mut exps = m.0.clone();
            exps[v] = 0;
            let mut k = c.clone();
            for _ in 0..e {
                k *= BigRational::from_integer(xi.clone());
            }
            out.insert_term(Mono(exps), k);
        }
        out
    }

    /// ξ-adic reconstruction with balanced remainders: recover g(x_v) from
    /// its value at x_v = ξ, coefficient polynomial by coefficient
    /// polynomial.
    fn genpoly(gamma: &Self, xi: &BigInt, v: usize) -> Self {
        let mut g = Self::zero(gamma.nvars);
        let mut cur = gamma.clone();
        let mut e: u16 = 0;
        let half = xi / BigInt::from(2);
        while !cur.is_zero() {
            if e > 512 {
                return Self::zero(gamma.nvars);
            }
            // Balanced mod ξ of each integer coefficient.
            let mut digit = Self::zero(gamma.nvars);
            let mut rest = Self::zero(gamma.nvars);
            for (m, c) in &cur.terms {
                let n = c.numer();
                let mut r = n.mod_floor(xi);
                if r > half {
                    r -= xi;
                }
                if !r.is_zero() {
                    let mut exps = m.0.clone();
                    exps[v] += e;
                    digit.insert_term(Mono(exps), BigRational::from_integer(r.clone()));
                }
                let q = (n - &r) / xi;
                if !q.is_zero() {
                    rest.insert_term(m.clone(), BigRational::from_integer(q));
                }
            }
            g = g.add(&digit);
            cur = rest;
            e += 1;
        }
        g
    }

    /// gcd of the integer coefficients (inputs must have integer
    /// coefficients).
    fn int_content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| num_integer::gcd(acc, c.numer().abs()))
    }

    /// Heuristic gcd of integer polynomials, including the integer content
    /// (the content carries the ξ-adic digits of the level above, so it
    /// must not be dropped); `None` when the evaluation points were
    /// unlucky.
    fn gcd_heu(a: &Self, b: &Self, depth: u32) -> Option<Self> {
        if depth > 8 {
            return None;
        }
        let ca = a.int_content();
        let cb = b.int_content();
        let cg = BigRational::from_integer(num_integer::gcd(ca.clone(), cb.clone()));
        let ap = a.scale(&(BigRational::one() / BigRational::from_integer(ca)));
        let bp = b.scale(&(BigRational::one() / BigRational::from_integer(cb)));
        if ap.as_constant().is_some() || bp.as_constant().is_some() {
            return Some(Self::constant(a.nvars, cg));
        }
        let v = ap
            .max_var_present()
            .unwrap()
            .max(bp.max_var_present().unwrap());
        let norm = ap.max_norm().min(bp.max_norm());
        let mut xi: BigInt = BigInt::from(2) * norm + BigInt::from(29);
        for _ in 0..6 {
            let av = ap.eval_var(v, &xi);
            let bv = bp.eval_var(v, &xi);
            if !av.is_zero() && !bv.is_zero() {
                if let Some(gamma) = Self::gcd_heu(&av, &bv, depth + 1) {
                    let cand = Self::genpoly(&gamma, &xi, v);
                    if !cand.is_zero() {
                        let cand = cand.integer_primitive();
                        if ap.exact_div(&cand).is_some() && bp.exact_div(&cand).is_some() {
                            return Some(cand.scale(&cg));
                        }
                    }
                }
            }
            xi = &xi * BigInt::from(73794) / BigInt::from(27011) + BigInt::one();
        }
        None
    }

    /// gcd over Q, normalized monic under graded lex. gcd(0,0) = 0.
    /// Heuristic evaluation gcd first, primitive PRS as fallback.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.as_constant().is_some() || b.as_constant().is_some() {
            return Self::one(a.nvars);
        }
        let ai = a.integer_primitive();
        let bi = b.integer_primitive();
        if let Some(g) = Self::gcd_heu(&ai, &bi, 0) {
            return g.monic();
        }
        Self::gcd_prs(a, b)
    }

    fn gcd_prs(a: &Self, b: &Self) -> Self {
        let va = a.max_var_present();
        let vb = b.max_var_present();
        let v = match (va, vb) {
            (Some(x), Some(y)) => x.max(y),
            _ => return Self::one(a.nvars),
        };
        if a.deg_in(v) == 0 || b.deg_in(v) == 0 {
            // One of them does not involve the main variable: gcd divides the
            // content of the other in v.
            let (flat, tall) = if a.deg_in(v) == 0 { (a, b) } else { (b, a) };
            return Self::gcd(flat, &tall.content_in(v));
        }
        let cont_a = a.content_in(v);
        let cont_b = b.content_in(v);
        let cont_g = Self::gcd(&cont_a, &cont_b);
        let mut f = a.primitive_in(v);
        let mut g = b.primitive_in(v);
        if f.deg_in(v) < g.deg_in(v) {
            std::mem::swap(&mut f, &mut g);
        }
        loop {
            let r = Self::prem(&f, &g, v);
            if r.is_zero() {
                break;
            }
            f = g;
            g = r.primitive_in(v);
            if g.as_constant().is_some() {
                return cont_g.monic();
            }
        }
        cont_g.mul(&g).monic()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| rational_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(names[i].clone());
                } else if e > 1 {
                    factors.push(format!("{}^{}", names[i], e));
                }
            }
            let coeff = if factors.is_empty() {
                format!("{}", c)
            } else if c.is_one() {
                String::new()
            } else if (-c.clone()).is_one() {
                "-".to_string()
            } else {
                format!("{}*", c)
            };
            parts.push(format!("{}{}", coeff, factors.join("*")));
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let nf = bigint_to_f64(n);
    let df = bigint_to_f64(d);
    if df == 0.0 {
        return f64::INFINITY;
    }
    nf / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    // Good enough for residual reporting; exact for small integers.
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(f64::INFINITY)
}

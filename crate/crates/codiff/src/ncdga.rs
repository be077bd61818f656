//! Noncommutative differential geometry on the algebra of functions on two
//! points with its universal calculus.
//!
//! The calculus is generated over A = k ⊕ k by a single 1-form θ with
//! relations θf = f̄θ and dθⁿ = (1 − (−1)ⁿ)θ^{n+1}, where f̄ is the flip of
//! f. The differential is inner: dω = θω − (−1)^{|ω|}ωθ. A degree −2
//! product ⊥ (default θᵐ⊥θⁿ = 2(−1)^{m+1} m n θ^{m+n−2}) induces an inner
//! codifferential δ = θ⊥, a covariant derivative ∇_ω = −½L_{⊥θ}(ω, ·) with
//! braiding σ, a quantum metric g = θ⊗θ, and the associated torsion,
//! Laplacians and curvature, all of which are verified here against exact
//! expectations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dga::Dga;
use crate::error::{Error, Result};
use crate::report::CheckResult;
use crate::scalar::TwoPointFn;

/// Element Σ_{n=0}^{cap} f_n θⁿ of the truncated universal calculus.
#[derive(Debug, Clone, PartialEq)]
pub struct NcForm {
    pub cap: usize,
    /// coefficient of θⁿ at index n; length cap + 1
    pub coeffs: Vec<TwoPointFn>,
}

impl NcForm {
    pub fn zero(cap: usize) -> Self {
        NcForm {
            cap,
            coeffs: vec![TwoPointFn::zero(); cap + 1],
        }
    }

    pub fn one(cap: usize) -> Self {
        Self::scalar(cap, TwoPointFn::one())
    }

    /// The function f as a degree-0 element.
    pub fn scalar(cap: usize, f: TwoPointFn) -> Self {
        let mut out = Self::zero(cap);
        out.coeffs[0] = f;
        out
    }

    /// f θⁿ
    pub fn monomial(cap: usize, f: TwoPointFn, n: usize) -> Result<Self> {
        if n > cap {
            return Err(Error::Overflow(format!(
                "monomial degree {} exceeds cap {}",
                n, cap
            )));
        }
        let mut out = Self::zero(cap);
        out.coeffs[n] = f;
        Ok(out)
    }

    pub fn theta_pow(cap: usize, n: usize) -> Result<Self> {
        Self::monomial(cap, TwoPointFn::one(), n)
    }

    pub fn theta(cap: usize) -> Self {
        Self::theta_pow(cap, 1).expect("cap must be at least 1")
    }

    fn check_cap(&self, other: &Self) -> Result<()> {
        if self.cap != other.cap {
            return Err(Error::MixedRing(format!(
                "nc form caps differ: {} vs {}",
                self.cap, other.cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(NcForm { cap: self.cap, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NcForm {
            cap: self.cap,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        NcForm {
            cap: self.cap,
            coeffs: self.coeffs.iter().map(|c| c.scale(q)).collect(),
        }
    }

    /// Product with the relation θf = f̄θ:
    /// (fθᵐ)(f′θⁿ) = f · bar^m(f′) θ^{m+n}.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        let mut out = Self::zero(self.cap);
        for (m, f) in self.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for (n, h) in other.coeffs.iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let c = f.mul(&h.bar_pow(m));
                if c.is_zero() {
                    continue;
                }
                if m + n > self.cap {
                    return Err(Error::Overflow(format!(
                        "product degree {} exceeds cap {}",
                        m + n,
                        self.cap
                    )));
                }
                out.coeffs[m + n] = out.coeffs[m + n].add(&c);
            }
        }
        Ok(out)
    }

    /// Inner differential dω = θω − (−1)^{|ω|}ωθ, which on monomials reads
    /// d(fθⁿ) = (f̄ − (−1)ⁿf) θ^{n+1}.
    pub fn d(&self) -> Result<Self> {
        let mut out = Self::zero(self.cap);
        for (n, f) in self.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let c = if n % 2 == 0 {
                f.bar().sub(f)
            } else {
                f.bar().add(f)
            };
            if c.is_zero() {
                continue;
            }
            if n + 1 > self.cap {
                return Err(Error::Overflow(format!(
                    "d raises degree {} beyond cap {}",
                    n, self.cap
                )));
            }
            out.coeffs[n + 1] = out.coeffs[n + 1].add(&c);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn residual_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.residual_norm())
            .fold(0.0, f64::max)
    }

    /// Degree if homogeneous and nonzero.
    pub fn degree(&self) -> Option<usize> {
        let mut deg = None;
        for (n, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                if deg.is_some() {
                    return None;
                }
                deg = Some(n);
            }
        }
        deg
    }

    pub fn homogeneous_parts(&self) -> Vec<(usize, NcForm)> {
        let mut parts = Vec::new();
        for (n, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut p = Self::zero(self.cap);
                p.coeffs[n] = c.clone();
                parts.push((n, p));
            }
        }
        parts
    }

    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = match n {
                0 => c.render(),
                1 => format!("{}·θ", c.render()),
                _ => format!("{}·θ^{}", c.render(), n),
            };
            terms.push(t);
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// The degree −2 product ⊥, given by a rule producing the rational multiple
/// c_{mn} in θᵐ⊥θⁿ = c_{mn} θ^{m+n−2}, extended as a bimodule map via the
/// bar-commutation relations. The rule is data so that gauge variants can
/// be injected; `standard` is the table c_{mn} = 2(−1)^{m+1} m n.
pub struct PerpTable {
    rule: Box<dyn Fn(usize, usize) -> BigRational + Send + Sync>,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl PerpTable {
    pub fn standard() -> Self {
        PerpTable {
            rule: Box::new(|m, n| {
                let sign = if m % 2 == 0 { -1 } else { 1 };
                big(2 * sign * m as i64 * n as i64)
            }),
        }
    }

    pub fn custom(rule: Box<dyn Fn(usize, usize) -> BigRational + Send + Sync>) -> Self {
        PerpTable { rule }
    }

    /// c_{mn}; zero whenever a factor is a function (⊥a = a⊥ = 0).
    pub fn coeff(&self, m: usize, n: usize) -> BigRational {
        if m == 0 || n == 0 {
            BigRational::zero()
        } else {
            (self.rule)(m, n)
        }
    }

    /// (fθᵐ)⊥(f′θⁿ) = f · bar^m(f′) · c_{mn} θ^{m+n−2}.
    pub fn perp(&self, a: &NcForm, b: &NcForm) -> Result<NcForm> {
        a.check_cap(b)?;
        let mut out = NcForm::zero(a.cap);
        for (m, f) in a.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for (n, h) in b.coeffs.iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let c = self.coeff(m, n);
                if c.is_zero() {
                    continue;
                }
                let v = f.mul(&h.bar_pow(m)).scale(&c);
                if v.is_zero() {
                    continue;
                }
                let deg = m + n - 2;
                if deg > a.cap {
                    return Err(Error::Overflow(format!(
                        "perp degree {} exceeds cap {}",
                        deg, a.cap
                    )));
                }
                out.coeffs[deg] = out.coeffs[deg].add(&v);
            }
        }
        Ok(out)
    }

    /// (ab)⊥ζ computed without materializing the product ab, so that
    /// intermediate degrees above the cap are fine as long as the result
    /// degree fits (⊥ lowers degree by 2).
    fn perp_left_product(&self, a: &NcForm, b: &NcForm, zeta: &NcForm) -> Result<NcForm> {
        a.check_cap(b)?;
        a.check_cap(zeta)?;
        let mut out = NcForm::zero(a.cap);
        for (m, f) in a.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for (n, h) in b.coeffs.iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                for (k, u) in zeta.coeffs.iter().enumerate() {
                    if u.is_zero() {
                        continue;
                    }
                    let c = self.coeff(m + n, k);
                    if c.is_zero() {
                        continue;
                    }
                    let v = f
                        .mul(&h.bar_pow(m))
                        .mul(&u.bar_pow(m + n))
                        .scale(&c);
                    if v.is_zero() {
                        continue;
                    }
                    let deg = m + n + k - 2;
                    if deg > a.cap {
                        return Err(Error::Overflow(format!(
                            "perp degree {} exceeds cap {}",
                            deg, a.cap
                        )));
                    }
                    out.coeffs[deg] = out.coeffs[deg].add(&v);
                }
            }
        }
        Ok(out)
    }

    /// Residual of the four-term compatibility identity
    /// (−1)^{|η|}(ωη)⊥ζ + (ω⊥η)ζ = ω⊥(ηζ) + (−1)^{|ω|+|η|}ω(η⊥ζ)
    /// over all basis triples (θᵐ, θⁿ, θᵏ) with m + n + k ≤ cap.
    pub fn four_term_check(&self, cap: usize) -> Result<CheckResult> {
        let mut worst = 0.0_f64;
        let mut samples = 0;
        for m in 0..=cap {
            for n in 0..=cap - m {
                for k in 0..=cap - m - n {
                    let w = NcForm::theta_pow(cap, m)?;
                    let e = NcForm::theta_pow(cap, n)?;
                    let z = NcForm::theta_pow(cap, k)?;
                    let sign_n = if n % 2 == 0 { big(1) } else { big(-1) };
                    let sign_mn = if (m + n) % 2 == 0 { big(1) } else { big(-1) };
                    let lhs = self
                        .perp(&w.mul(&e)?, &z)?
                        .scale(&sign_n)
                        .add(&self.perp(&w, &e)?.mul(&z)?)?;
                    let rhs = self
                        .perp(&w, &e.mul(&z)?)?
                        .add(&w.mul(&self.perp(&e, &z)?)?.scale(&sign_mn))?;
                    worst = worst.max(lhs.sub(&rhs)?.residual_norm());
                    samples += 1;
                }
            }
        }
        Ok(CheckResult::new("perp.fourterm", worst, 0.0, samples))
    }
}

/// Inner codifferential δ = θ⊥. For the standard table,
/// δ(fθⁿ) = 2 f̄ n θ^{n−1}.
pub fn nc_inner_delta(p: &PerpTable, omega: &NcForm) -> Result<NcForm> {
    p.perp(&NcForm::theta(omega.cap), omega)
}

/// The cleft cochain j_ω(ζ) = ½ ω⊥ζ of the inner case.
pub fn nc_j(p: &PerpTable, omega: &NcForm, zeta: &NcForm) -> Result<NcForm> {
    Ok(p.perp(omega, zeta)?.scale(&(big(1) / big(2))))
}

/// Degree-preserving pairing (ω, η) = ½ ω⊥η; on 1-forms
/// (fθ, f′θ) = f f̄′.
pub fn nc_pairing(p: &PerpTable, omega: &NcForm, eta: &NcForm) -> Result<NcForm> {
    nc_j(p, omega, eta)
}

/// Covariant derivative ∇_ω = −½ L_{⊥θ}(ω, ·), i.e.
/// ∇_ωη = −½[(ωη)⊥θ − (ω⊥θ)η − (−1)^{|ω|}ω(η⊥θ)].
/// The subscript ω must have no degree-0 component.
pub fn nc_connection(p: &PerpTable, omega: &NcForm, eta: &NcForm) -> Result<NcForm> {
    omega.check_cap(eta)?;
    if !omega.coeffs[0].is_zero() {
        return Err(Error::DegreeError(
            "connection subscript must have degree at least 1".to_string(),
        ));
    }
    let theta = NcForm::theta(omega.cap);
    let mut out = NcForm::zero(omega.cap);
    for (m, w) in omega.homogeneous_parts() {
        let sign = if m % 2 == 0 { big(1) } else { big(-1) };
        let t1 = p.perp_left_product(&w, eta, &theta)?;
        let t2 = p.perp(&w, &theta)?.mul(eta)?;
        let t3 = w.mul(&p.perp(eta, &theta)?)?.scale(&sign);
        let l = t1.sub(&t2)?.sub(&t3)?;
        out = out.add(&l.scale(&(big(-1) / big(2))))?;
    }
    Ok(out)
}

/// Braiding σ_ω(η⊗ζ) = j_{ωη}(ζ) − (−1)^{|ω|} ω j_η(ζ)
///                    = ½[(ωη)⊥ζ − (−1)^{|ω|} ω(η⊥ζ)], for ζ of degree 1.
pub fn nc_sigma(p: &PerpTable, omega: &NcForm, eta: &NcForm, zeta: &NcForm) -> Result<NcForm> {
    omega.check_cap(eta)?;
    omega.check_cap(zeta)?;
    if zeta.degree() != Some(1) {
        return Err(Error::DegreeError(
            "sigma requires a degree-1 right tensor factor".to_string(),
        ));
    }
    let mut out = NcForm::zero(omega.cap);
    for (m, w) in omega.homogeneous_parts() {
        let sign = if m % 2 == 0 { big(1) } else { big(-1) };
        let t1 = p.perp_left_product(&w, eta, zeta)?;
        let t2 = w.mul(&p.perp(eta, zeta)?)?.scale(&sign);
        out = out.add(&t1.sub(&t2)?.scale(&(big(1) / big(2))))?;
    }
    Ok(out)
}

/// Element of Ω ⊗_A Ω in the normal form Σ T_{mn} θᵐ⊗θⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct NcTensor {
    pub cap: usize,
    /// comps[m][n] is the coefficient of θᵐ⊗θⁿ
    pub comps: Vec<Vec<TwoPointFn>>,
}

impl NcTensor {
    pub fn zero(cap: usize) -> Self {
        NcTensor {
            cap,
            comps: vec![vec![TwoPointFn::zero(); cap + 1]; cap + 1],
        }
    }

    /// a ⊗_A b in normal form: fθᵐ ⊗ hθⁿ = f·bar^m(h) θᵐ⊗θⁿ.
    pub fn from_simple(a: &NcForm, b: &NcForm) -> Result<Self> {
        a.check_cap(b)?;
        let mut out = Self::zero(a.cap);
        for (m, f) in a.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for (n, h) in b.coeffs.iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let c = f.mul(&h.bar_pow(m));
                out.comps[m][n] = out.comps[m][n].add(&c);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.cap != other.cap {
            return Err(Error::MixedRing("tensor caps differ".to_string()));
        }
        let mut out = self.clone();
        for m in 0..=self.cap {
            for n in 0..=self.cap {
                out.comps[m][n] = out.comps[m][n].add(&other.comps[m][n]);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.comps {
            for c in row.iter_mut() {
                *c = c.neg();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(|c| c.is_zero())
    }

    pub fn residual_norm(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .map(|c| c.residual_norm())
            .fold(0.0, f64::max)
    }

    /// Apply the product map ∧ : Ω ⊗_A Ω → Ω.
    pub fn wedge(&self) -> Result<NcForm> {
        let mut out = NcForm::zero(self.cap);
        for m in 0..=self.cap {
            for n in 0..=self.cap {
                let c = &self.comps[m][n];
                if c.is_zero() {
                    continue;
                }
                if m + n > self.cap {
                    return Err(Error::Overflow(format!(
                        "tensor product degree {} exceeds cap {}",
                        m + n,
                        self.cap
                    )));
                }
                out.coeffs[m + n] = out.coeffs[m + n].add(c);
            }
        }
        Ok(out)
    }
}

/// The quantum metric g = θ⊗θ.
pub fn nc_metric(cap: usize) -> Result<NcTensor> {
    let theta = NcForm::theta(cap);
    NcTensor::from_simple(&theta, &theta)
}

/// Full covariant derivative ∇ω = g¹ ⊗ ∇_{g²}ω = θ ⊗ ∇_θω.
pub fn nc_nabla_full(p: &PerpTable, omega: &NcForm) -> Result<NcTensor> {
    let theta = NcForm::theta(omega.cap);
    NcTensor::from_simple(&theta, &nc_connection(p, &theta, omega)?)
}

/// ∇_θ on Ω ⊗_A Ω via the tensor-product rule
/// ∇_θ(η⊗ζ) = ∇_θη ⊗ ζ + σ_θ(η⊗g¹) ⊗ ∇_{g²}ζ.
pub fn nc_covtens_theta(p: &PerpTable, t: &NcTensor) -> Result<NcTensor> {
    let cap = t.cap;
    let theta = NcForm::theta(cap);
    let mut out = NcTensor::zero(cap);
    for m in 0..=cap {
        for n in 0..=cap {
            let c = &t.comps[m][n];
            if c.is_zero() {
                continue;
            }
            let eta = NcForm::monomial(cap, c.clone(), m)?;
            let zeta = NcForm::theta_pow(cap, n)?;
            let first = NcTensor::from_simple(&nc_connection(p, &theta, &eta)?, &zeta)?;
            let second = NcTensor::from_simple(
                &nc_sigma(p, &theta, &eta, &theta)?,
                &nc_connection(p, &theta, &zeta)?,
            )?;
            out = out.add(&first.add(&second)?)?;
        }
    }
    Ok(out)
}

/// Algebraic torsion T = g¹∇_{g²} − d = θ∇_θ − d.
pub fn nc_torsion(p: &PerpTable, omega: &NcForm) -> Result<NcForm> {
    let theta = NcForm::theta(omega.cap);
    theta.mul(&nc_connection(p, &theta, omega)?)?.sub(&omega.d()?)
}

/// Hodge-style Laplacian Δ = dδ + δd.
pub fn nc_laplacian(p: &PerpTable, omega: &NcForm) -> Result<NcForm> {
    let a = nc_inner_delta(p, omega)?.d()?;
    let b = nc_inner_delta(p, &omega.d()?)?;
    a.add(&b)
}

/// Laplace–Beltrami operator Δ_LB = ∇_{g¹}∇_{g²} − ∇_{∇_{g¹}g²}.
pub fn nc_laplace_beltrami(p: &PerpTable, omega: &NcForm) -> Result<NcForm> {
    let theta = NcForm::theta(omega.cap);
    let first = nc_connection(p, &theta, &nc_connection(p, &theta, omega)?)?;
    let nabla_theta_theta = nc_connection(p, &theta, &theta)?;
    let second = nc_connection(p, &nabla_theta_theta, omega)?;
    first.sub(&second)
}

/// Curvature R(ω) = (d⊗id − (∧⊗id)(id⊗∇))∇ω ∈ Ω²⊗Ω.
pub fn nc_curvature(p: &PerpTable, omega: &NcForm) -> Result<NcTensor> {
    let cap = omega.cap;
    let theta = NcForm::theta(cap);
    let grad = nc_nabla_full(p, omega)?;
    let mut out = NcTensor::zero(cap);
    for m in 0..=cap {
        for n in 0..=cap {
            let c = &grad.comps[m][n];
            if c.is_zero() {
                continue;
            }
            let first_leg = NcForm::monomial(cap, c.clone(), m)?;
            let second_leg = NcForm::theta_pow(cap, n)?;
            let t1 = NcTensor::from_simple(&first_leg.d()?, &second_leg)?;
            let t2 = NcTensor::from_simple(
                &first_leg.mul(&theta)?,
                &nc_connection(p, &theta, &second_leg)?,
            )?;
            out = out.add(&t1.sub(&t2)?)?;
        }
    }
    Ok(out)
}

fn random_two_point<R: Rng>(rng: &mut R) -> TwoPointFn {
    TwoPointFn::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
}

/// Random homogeneous fθⁿ of the given degree.
pub fn random_nc_monomial<R: Rng>(rng: &mut R, cap: usize, degree: usize) -> Result<NcForm> {
    NcForm::monomial(cap, random_two_point(rng), degree)
}

/// Metric, torsion, Laplacian and curvature checks of the two-point model.
pub fn nc_metric_checks(p: &PerpTable, cap: usize, seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = NcForm::theta(cap);
    let mut out = Vec::new();

    // (fθ, f′θ) = f f̄′
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let f = random_two_point(&mut rng);
        let h = random_two_point(&mut rng);
        let lhs = nc_pairing(
            p,
            &NcForm::monomial(cap, f.clone(), 1)?,
            &NcForm::monomial(cap, h.clone(), 1)?,
        )?;
        let rhs = NcForm::scalar(cap, f.mul(&h.bar()));
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("pairing.values", worst, 0.0, samples));

    // (ω, g¹)g² = ω = g¹(g², ω) for 1-forms
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let w = random_nc_monomial(&mut rng, cap, 1)?;
        let left = nc_pairing(p, &w, &theta)?.mul(&theta)?;
        let right = theta.mul(&nc_pairing(p, &theta, &w)?)?;
        worst = worst.max(left.sub(&w)?.residual_norm());
        worst = worst.max(right.sub(&w)?.residual_norm());
    }
    out.push(CheckResult::new("pairing.inverse", worst, 0.0, samples));

    // metric compatibility ∇_θ g = 0 via the tensor-product rule
    let grad_g = nc_covtens_theta(p, &nc_metric(cap)?)?;
    out.push(CheckResult::new(
        "metric.compat",
        grad_g.residual_norm(),
        0.0,
        1,
    ));

    // torsion T(fθⁿ) = 0
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 0..cap {
        let w = random_nc_monomial(&mut rng, cap, n)?;
        worst = worst.max(nc_torsion(p, &w)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("torsion.vanishes", worst, 0.0, count));

    // Δω = 2(∇_θω + 2|ω|ω)
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 0..cap {
        let w = random_nc_monomial(&mut rng, cap, n)?;
        let lhs = nc_laplacian(p, &w)?;
        let rhs = nc_connection(p, &theta, &w)?
            .add(&w.scale(&big(2 * n as i64)))?
            .scale(&big(2));
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("laplacian.formula", worst, 0.0, count));

    // Δ = 2∇_θ − θ²⊥ (inner form of the Laplacian)
    let theta2 = NcForm::theta_pow(cap, 2)?;
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 0..cap {
        let w = random_nc_monomial(&mut rng, cap, n)?;
        let lhs = nc_laplacian(p, &w)?;
        let rhs = nc_connection(p, &theta, &w)?
            .scale(&big(2))
            .sub(&p.perp(&theta2, &w)?)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("laplacian.inner", worst, 0.0, count));

    // Δ_LB = (∇_θ)² − 2∇_θ = 0 on all basis degrees
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 0..=cap {
        let w = random_nc_monomial(&mut rng, cap, n)?;
        worst = worst.max(nc_laplace_beltrami(p, &w)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("lb.vanishes", worst, 0.0, count));

    // curvature R(θⁿ) = 0
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 1..cap {
        let w = random_nc_monomial(&mut rng, cap, n)?;
        worst = worst.max(nc_curvature(p, &w)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("curvature.vanishes", worst, 0.0, count));

    // δ² is nonzero but commutes with functions
    let mut worst = 0.0_f64;
    let mut nonzero_seen = false;
    for _ in 0..samples {
        let n = rng.gen_range(2..=cap);
        let w = random_nc_monomial(&mut rng, cap, n)?;
        let a = NcForm::scalar(cap, random_two_point(&mut rng));
        let d2 = |x: &NcForm| -> Result<NcForm> {
            nc_inner_delta(p, &nc_inner_delta(p, x)?)
        };
        if !d2(&w)?.is_zero() {
            nonzero_seen = true;
        }
        let lhs = d2(&a.mul(&w)?)?;
        let rhs = a.mul(&d2(&w)?)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new(
        "delta.squared_commutes",
        worst,
        0.0,
        samples,
    ));
    out.push(CheckResult::new(
        "delta.squared_nonzero",
        if nonzero_seen { 0.0 } else { 1.0 },
        0.0,
        samples,
    ));

    Ok(out)
}

/// Braided-Leibniz equivalences: the rule for (∇, σ) and for
/// (∇′, σ′) = (j_·(g¹)∇_{g²}, j_·(g¹)σ_{g²}), the agreement ∇ = ∇′ in all
/// degrees, and the j composition law.
pub fn braided_leibniz_check(
    p: &PerpTable,
    cap: usize,
    seed: u64,
    samples: usize,
) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = NcForm::theta(cap);
    let mut out = Vec::new();

    let nabla_prime = |w: &NcForm, e: &NcForm| -> Result<NcForm> {
        nc_j(p, w, &theta)?.mul(&nc_connection(p, &theta, e)?)
    };
    let sigma_prime = |w: &NcForm, e: &NcForm, z: &NcForm| -> Result<NcForm> {
        nc_j(p, w, &theta)?.mul(&nc_sigma(p, &theta, e, z)?)
    };

    // ∇_ω = ∇′_ω = j_ω(g¹)∇_{g²} on all basis subscripts
    let mut worst = 0.0_f64;
    let mut count = 0;
    for m in 1..=cap {
        for n in 0..=cap {
            if m - 1 + n > cap || m + n > cap {
                continue;
            }
            let w = NcForm::theta_pow(cap, m)?;
            let e = random_nc_monomial(&mut rng, cap, n)?;
            let lhs = nc_connection(p, &w, &e)?;
            let rhs = nabla_prime(&w, &e)?;
            worst = worst.max(lhs.sub(&rhs)?.residual_norm());
            count += 1;
        }
    }
    out.push(CheckResult::new("braleib.nabla_prime", worst, 0.0, count));

    // braided-Leibniz rule for (∇, σ) and for (∇′, σ′):
    // ∇_ω(ηζ) = (∇_ωη)ζ + σ_ω(η⊗g¹)∇_{g²}ζ
    let mut worst = 0.0_f64;
    let mut worst_prime = 0.0_f64;
    for _ in 0..samples {
        let m = rng.gen_range(1..=2.min(cap));
        let n = rng.gen_range(0..=2.min(cap));
        let k = rng.gen_range(0..=(cap.saturating_sub(m + n + 1)).min(2));
        let w = random_nc_monomial(&mut rng, cap, m)?;
        let e = random_nc_monomial(&mut rng, cap, n)?;
        let z = random_nc_monomial(&mut rng, cap, k)?;
        let lhs = nc_connection(p, &w, &e.mul(&z)?)?;
        let rhs = nc_connection(p, &w, &e)?.mul(&z)?.add(
            &nc_sigma(p, &w, &e, &theta)?.mul(&nc_connection(p, &theta, &z)?)?,
        )?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
        let lhs_p = nabla_prime(&w, &e.mul(&z)?)?;
        let rhs_p = nabla_prime(&w, &e)?.mul(&z)?.add(
            &sigma_prime(&w, &e, &theta)?.mul(&nc_connection(p, &theta, &z)?)?,
        )?;
        worst_prime = worst_prime.max(lhs_p.sub(&rhs_p)?.residual_norm());
    }
    out.push(CheckResult::new("braleib.sigmaderiv", worst, 0.0, samples));
    out.push(CheckResult::new(
        "braleib.sigmaderiv_prime",
        worst_prime,
        0.0,
        samples,
    ));

    // j_{ωη} = j_ω(g¹)(j_{g²η} + g²j_η) + (−1)^{|ω|} ω j_η
    let mut worst = 0.0_f64;
    let mut count = 0;
    for m in 0..=cap {
        for n in 0..=cap {
            if m + n + 1 > cap {
                continue;
            }
            let w = NcForm::theta_pow(cap, m)?;
            let e = NcForm::theta_pow(cap, n)?;
            let z = random_nc_monomial(&mut rng, cap, 1)?;
            let sign = if m % 2 == 0 { big(1) } else { big(-1) };
            let lhs = nc_j(p, &w.mul(&e)?, &z)?;
            let inner = nc_j(p, &theta.mul(&e)?, &z)?
                .add(&theta.mul(&nc_j(p, &e, &z)?)?)?;
            let rhs = nc_j(p, &w, &theta)?
                .mul(&inner)?
                .add(&w.mul(&nc_j(p, &e, &z)?)?.scale(&sign))?;
            worst = worst.max(lhs.sub(&rhs)?.residual_norm());
            count += 1;
        }
    }
    out.push(CheckResult::new("braleib.jlaw", worst, 0.0, count));

    Ok(out)
}

/// Torsion compatibility condition and the derivation property of T.
pub fn nc_torsion_compat(
    p: &PerpTable,
    cap: usize,
    seed: u64,
    samples: usize,
) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = NcForm::theta(cap);
    let theta2 = NcForm::theta_pow(cap, 2)?;
    let mut out = Vec::new();

    // g¹g²j_ω(ζ) + g¹j_{g²ω}(ζ) = (−1)^{|ω|}ωζ
    let mut worst = 0.0_f64;
    let mut count = 0;
    for m in 0..cap {
        let w = random_nc_monomial(&mut rng, cap, m)?;
        let z = random_nc_monomial(&mut rng, cap, 1)?;
        let sign = if m % 2 == 0 { big(1) } else { big(-1) };
        let lhs = theta2.mul(&nc_j(p, &w, &z)?)?.add(
            &theta.mul(&nc_j(p, &theta.mul(&w)?, &z)?)?,
        )?;
        let rhs = w.mul(&z)?.scale(&sign);
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("torsioncompat.condition", worst, 0.0, count));

    // T is a derivation: T(ωη) = (Tω)η + (−1)^{|ω|}ωTη
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let m = rng.gen_range(0..=2.min(cap.saturating_sub(2)));
        let n = rng.gen_range(0..=(cap.saturating_sub(m + 1)).min(2));
        let w = random_nc_monomial(&mut rng, cap, m)?;
        let e = random_nc_monomial(&mut rng, cap, n)?;
        let sign = if m % 2 == 0 { big(1) } else { big(-1) };
        let lhs = nc_torsion(p, &w.mul(&e)?)?;
        let rhs = nc_torsion(p, &w)?
            .mul(&e)?
            .add(&w.mul(&nc_torsion(p, &e)?)?.scale(&sign))?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new(
        "torsioncompat.derivation",
        worst,
        0.0,
        samples,
    ));

    Ok(out)
}

/// Quantum-symmetry test for Ricci_Δ and the Laplace–Beltrami Leibnizator.
pub fn nc_ricci_delta(
    p: &PerpTable,
    cap: usize,
    seed: u64,
    samples: usize,
) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta2 = NcForm::theta_pow(cap, 2)?;
    let mut out = Vec::new();

    // ∧(g) = θ² ≠ 0, so Ricci_Δ is undefined for this metric. The check
    // passes when the non-quantum-symmetry is correctly detected.
    let wedge_g = nc_metric(cap)?.wedge()?;
    out.push(CheckResult::new(
        "riccidelta.not_quantum_symmetric",
        if wedge_g.is_zero() { 1.0 } else { 0.0 },
        0.0,
        1,
    ));

    // L_{Δ_LB}(a, ω) = ∇_{2da + j_{g¹g²}(da)}ω
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let a = NcForm::scalar(cap, random_two_point(&mut rng));
        let n = rng.gen_range(0..cap);
        let w = random_nc_monomial(&mut rng, cap, n)?;
        let lhs = nc_laplace_beltrami(p, &a.mul(&w)?)?
            .sub(&a.mul(&nc_laplace_beltrami(p, &w)?)?)?;
        let da = a.d()?;
        let subscript = da.scale(&big(2)).add(&nc_j(p, &theta2, &da)?)?;
        let rhs = nc_connection(p, &subscript, &w)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riccidelta.lb_leibnizator", worst, 0.0, samples));

    // Δ_LB is nonetheless tensorial here: Δ_LB(aω) = aΔ_LB(ω)
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let a = NcForm::scalar(cap, random_two_point(&mut rng));
        let n = rng.gen_range(0..=cap);
        let w = random_nc_monomial(&mut rng, cap, n)?;
        let lhs = nc_laplace_beltrami(p, &a.mul(&w)?)?;
        let rhs = a.mul(&nc_laplace_beltrami(p, &w)?)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riccidelta.lb_tensorial", worst, 0.0, samples));

    Ok(out)
}

/// The two-point universal calculus as a differential graded algebra,
/// truncated at `cap`.
pub struct Z2Dga {
    pub cap: usize,
}

impl Z2Dga {
    pub fn new(cap: usize) -> Self {
        Z2Dga { cap }
    }
}

impl Dga for Z2Dga {
    type Elem = NcForm;

    fn zero(&self) -> NcForm {
        NcForm::zero(self.cap)
    }

    fn one(&self) -> NcForm {
        NcForm::one(self.cap)
    }

    fn add(&self, a: &NcForm, b: &NcForm) -> Result<NcForm> {
        a.add(b)
    }

    fn neg(&self, a: &NcForm) -> NcForm {
        a.neg()
    }

    fn mul(&self, a: &NcForm, b: &NcForm) -> Result<NcForm> {
        a.mul(b)
    }

    fn d(&self, a: &NcForm) -> Result<NcForm> {
        a.d()
    }

    fn scale(&self, a: &NcForm, q: &BigRational) -> NcForm {
        a.scale(q)
    }

    fn is_zero(&self, a: &NcForm) -> bool {
        a.is_zero()
    }

    fn residual_norm(&self, a: &NcForm) -> f64 {
        a.residual_norm()
    }

    fn homogeneous_parts(&self, a: &NcForm) -> Vec<(usize, NcForm)> {
        a.homogeneous_parts()
    }

    fn render(&self, a: &NcForm) -> String {
        a.render()
    }
}

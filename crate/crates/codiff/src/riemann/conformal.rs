//! δ-conformal 1-forms: conformal Killing data and the full family of
//! commutation identities between 𝓛_τ and the codifferential calculus.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    hodge_laplacian, interior_multi, interior_one, l_delta, levi_connection, lie_derivative,
    pairing_scalar, FormMap, Metric,
};
use crate::error::{Error, Result};
use crate::forms::{random_form, Form};
use crate::report::CheckResult;
use crate::scalar::Scalar;

/// Conformal data attached to a 1-form τ: the factor α = δ∇τ / β and
/// β = ½ (,)(g) (= n/2 for an n-dimensional metric).
#[derive(Debug, Clone)]
pub struct ConformalData<S: Scalar> {
    pub tau: Form<S>,
    pub alpha: S,
    /// β as an exact rational (n/2).
    pub beta: BigRational,
}

pub fn conformal_data<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    tau: &Form<S>,
) -> Result<ConformalData<S>> {
    if tau.degree().unwrap_or(1) != 1 {
        return Err(Error::DegreeError("τ must be a 1-form".into()));
    }
    // β = ½ Σ g_ij g^{ij}; checked to be the constant n/2.
    let half = BigRational::new(1.into(), 2.into());
    let mut tr = m.exemplar.zero_like();
    for i in 0..m.n {
        for j in 0..m.n {
            tr = tr.add(&m.g[i][j].mul(&m.ginv[j][i])?)?;
        }
    }
    let beta_s = tr.scale(&half);
    let beta = BigRational::new((m.n as i64).into(), 2.into());
    let expect = m.exemplar.one_like().scale(&beta);
    if !beta_s.sub(&expect)?.is_zero() {
        return Err(Error::InvalidMetric("trace of the pairing is not n".into()));
    }
    let div = delta(tau)?.coeff(0, &m.exemplar);
    let alpha = div.scale(&(BigRational::new(1.into(), 1.into()) / &beta));
    Ok(ConformalData { tau: tau.clone(), alpha, beta })
}

struct Ctx<'a, S: Scalar> {
    m: &'a Metric<S>,
    delta: FormMap<'a, S>,
    data: &'a ConformalData<S>,
    dalpha: Form<S>,
}

impl<'a, S: Scalar> Ctx<'a, S> {
    fn lie_tau(&self, w: &Form<S>) -> Result<Form<S>> {
        lie_derivative(&self.m.ginv, &self.data.tau, w)
    }

    fn i_dalpha(&self, w: &Form<S>) -> Result<Form<S>> {
        interior_one(&self.m.ginv, &self.dalpha, w)
    }

    fn alpha_mul(&self, w: &Form<S>) -> Result<Form<S>> {
        w.scalar_mul(&self.data.alpha)
    }

    /// (k − β)·w for homogeneous degree k.
    fn degree_minus_beta(&self, k: usize, w: &Form<S>) -> Form<S> {
        let c = BigRational::new((k as i64).into(), 1.into()) - &self.data.beta;
        w.scale(&c)
    }
}

/// (𝓛_τ ω, η) + (ω, 𝓛_τ η) − (τ, d(ω, η)) − α (ω, η) for 1-forms.
fn confmet_residual<S: Scalar>(c: &Ctx<S>, w: &Form<S>, e: &Form<S>) -> Result<S> {
    let p = &c.m.ginv;
    let ex = &c.m.exemplar;
    let a = pairing_scalar(p, &c.lie_tau(w)?, e, ex)?;
    let b = pairing_scalar(p, w, &c.lie_tau(e)?, ex)?;
    let pair = pairing_scalar(p, w, e, ex)?;
    let dpair = Form::scalar(w.n, pair.clone()).exterior_d()?;
    let t = pairing_scalar(p, &c.data.tau, &dpair, ex)?;
    a.add(&b)?.sub(&t)?.sub(&c.data.alpha.mul(&pair)?)
}

/// ∇_ω τ − ½ i_ω dτ − (α/2) ω for 1-forms ω.
fn confkilling_residual<S: Scalar>(c: &Ctx<S>, w: &Form<S>) -> Result<Form<S>> {
    let half = BigRational::new(1.into(), 2.into());
    let nab = levi_connection(&c.m.ginv, c.delta, w, &c.data.tau)?;
    let mid = interior_one(&c.m.ginv, w, &c.data.tau.exterior_d()?)?.scale(&half);
    let last = w.scalar_mul(&c.data.alpha.scale(&half))?;
    nab.sub(&mid)?.sub(&last)
}

/// [δ, 𝓛_τ] ω − α δω − i_{dα} ((|ω| − β) ω) for homogeneous ω.
fn liedelta_residual<S: Scalar>(c: &Ctx<S>, k: usize, w: &Form<S>) -> Result<Form<S>> {
    let comm = (c.delta)(&c.lie_tau(w)?)?.sub(&c.lie_tau(&(c.delta)(w)?)?)?;
    let first = c.alpha_mul(&(c.delta)(w)?)?;
    let second = c.i_dalpha(&c.degree_minus_beta(k, w))?;
    comm.sub(&first)?.sub(&second)
}

/// 𝓛_τ(ω⊥η) + α ω⊥η − (𝓛_τω)⊥η − ω⊥(𝓛_τη).
fn lieperp_residual<S: Scalar>(c: &Ctx<S>, w: &Form<S>, e: &Form<S>) -> Result<Form<S>> {
    let p = &c.m.ginv;
    let we = super::perp(p, w, e)?;
    c.lie_tau(&we)?
        .add(&c.alpha_mul(&we)?)?
        .sub(&super::perp(p, &c.lie_tau(w)?, e)?)?
        .sub(&super::perp(p, w, &c.lie_tau(e)?)?)
}

/// S(ω, η) = ω⊥dη − (−1)^{|ω|} d(ω⊥η) − (−1)^{|ω|} (dω)⊥η.
fn s_of<S: Scalar>(p: &[Vec<S>], k: usize, w: &Form<S>, e: &Form<S>) -> Result<Form<S>> {
    let a = super::perp(p, w, &e.exterior_d()?)?;
    let mut b = super::perp(p, w, e)?.exterior_d()?;
    let mut cc = super::perp(p, &w.exterior_d()?, e)?;
    if k % 2 != 0 {
        b = b.neg();
        cc = cc.neg();
    }
    a.sub(&b)?.sub(&cc)
}

/// 𝓛_τ S(ω,η) + α S(ω,η) − S(𝓛_τω, η) − S(ω, 𝓛_τη)
/// − (−1)^{|ω|} dα ∧ (ω⊥η).
fn lieperp_s_residual<S: Scalar>(c: &Ctx<S>, k: usize, w: &Form<S>, e: &Form<S>) -> Result<Form<S>> {
    let p = &c.m.ginv;
    let s = s_of(p, k, w, e)?;
    let mut rhs = c.dalpha.wedge(&super::perp(p, w, e)?)?;
    if k % 2 != 0 {
        rhs = rhs.neg();
    }
    c.lie_tau(&s)?
        .add(&c.alpha_mul(&s)?)?
        .sub(&s_of(p, k, &c.lie_tau(w)?, e)?)?
        .sub(&s_of(p, k, w, &c.lie_tau(e)?)?)?
        .sub(&rhs)
}

/// [i_η, 𝓛_τ] ζ − α i_η ζ + i_{𝓛_τ η} ζ for η ∈ Ω¹, ζ of any degree.
fn lieint_residual<S: Scalar>(c: &Ctx<S>, e: &Form<S>, z: &Form<S>) -> Result<Form<S>> {
    let p = &c.m.ginv;
    let comm = interior_multi(p, e, &c.lie_tau(z)?)?.sub(&c.lie_tau(&interior_multi(p, e, z)?)?)?;
    comm.sub(&c.alpha_mul(&interior_multi(p, e, z)?)?)?
        .add(&interior_multi(p, &c.lie_tau(e)?, z)?)
}

/// 𝓛_τ L_δ(ω,η) + α L_δ(ω,η) − L_δ(𝓛_τω, η) − L_δ(ω, 𝓛_τη)
/// + (−1)^{|ω|} |ω| ω i_{dα} η + |η| (i_{dα} ω) η.
fn lieleib_residual<S: Scalar>(
    c: &Ctx<S>,
    kw: usize,
    w: &Form<S>,
    ke: usize,
    e: &Form<S>,
) -> Result<Form<S>> {
    let l = l_delta(c.delta, w, e)?;
    let mut acc = c
        .lie_tau(&l)?
        .add(&c.alpha_mul(&l)?)?
        .sub(&l_delta(c.delta, &c.lie_tau(w)?, e)?)?
        .sub(&l_delta(c.delta, w, &c.lie_tau(e)?)?)?;
    let mut t1 = w
        .wedge(&c.i_dalpha(e)?)?
        .scale(&BigRational::new((kw as i64).into(), 1.into()));
    if kw % 2 != 0 {
        t1 = t1.neg();
    }
    let t2 = c
        .i_dalpha(w)?
        .wedge(e)?
        .scale(&BigRational::new((ke as i64).into(), 1.into()));
    acc = acc.add(&t1)?.add(&t2)?;
    Ok(acc)
}

/// [Δ, 𝓛_τ] ω − α Δω − (D − β) 𝓛_{dα} ω − dα ∧ δω − i_{dα} dω.
fn lielap_residual<S: Scalar>(c: &Ctx<S>, w: &Form<S>) -> Result<Form<S>> {
    let lap = |x: &Form<S>| hodge_laplacian(c.delta, x);
    let comm = lap(&c.lie_tau(w)?)?.sub(&c.lie_tau(&lap(w)?)?)?;
    let mut rhs = c.alpha_mul(&lap(w)?)?;
    for (k, part) in w.homogeneous_parts() {
        let lie = lie_derivative(&c.m.ginv, &c.dalpha, &part)?;
        rhs = rhs.add(&c.degree_minus_beta(k, &lie))?;
    }
    rhs = rhs.add(&c.dalpha.wedge(&(c.delta)(w)?)?)?;
    rhs = rhs.add(&c.i_dalpha(&w.exterior_d()?)?)?;
    comm.sub(&rhs)
}

/// 𝓛_τ τ − α τ.
fn lietau_residual<S: Scalar>(c: &Ctx<S>) -> Result<Form<S>> {
    c.lie_tau(&c.data.tau)?.sub(&c.alpha_mul(&c.data.tau)?)
}

/// Run every conformal identity against sampled forms and report maximal
/// residuals. `strong` includes the identities involving dα, |ω|-weighted
/// terms and the Laplacian commutator; without it only the degree-1
/// conformal Killing layer is checked.
pub fn conformal_check<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    tau: &Form<S>,
    samples: usize,
    seed: u64,
    tolerance: f64,
    strong: bool,
) -> Result<Vec<CheckResult>> {
    let data = conformal_data(m, delta, tau)?;
    let dalpha = Form::scalar(m.n, data.alpha.clone()).exterior_d()?;
    let c = Ctx { m, delta, data: &data, dalpha };
    let n = m.n;
    let ex = &m.exemplar;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut r_confmet: f64 = 0.0;
    let mut r_confkilling: f64 = 0.0;
    let mut r_lietau: f64 = lietau_residual(&c)?.residual_norm();
    let mut r_liedelta1: f64 = 0.0;
    let mut r_liedelta: f64 = 0.0;
    let mut r_lieperp: f64 = 0.0;
    let mut r_lieperp_s: f64 = 0.0;
    let mut r_lieint: f64 = 0.0;
    let mut r_lieleib: f64 = 0.0;
    let mut r_lielap: f64 = 0.0;

    for _ in 0..samples {
        let w1 = random_form(&mut rng, n, 1, ex);
        let e1 = random_form(&mut rng, n, 1, ex);
        r_confmet = r_confmet.max(confmet_residual(&c, &w1, &e1)?.residual_norm());
        r_confkilling = r_confkilling.max(confkilling_residual(&c, &w1)?.residual_norm());
        r_liedelta1 = r_liedelta1.max(liedelta_residual(&c, 1, &w1)?.residual_norm());

        if strong {
            let kw = rng.gen_range(0..=n);
            let ke = rng.gen_range(0..=n);
            let w = random_form(&mut rng, n, kw, ex);
            let e = random_form(&mut rng, n, ke, ex);
            let z1 = random_form(&mut rng, n, 1, ex);
            r_liedelta = r_liedelta.max(liedelta_residual(&c, kw, &w)?.residual_norm());
            r_lieperp = r_lieperp.max(lieperp_residual(&c, &w, &e)?.residual_norm());
            r_lieperp_s = r_lieperp_s.max(lieperp_s_residual(&c, kw, &w, &e)?.residual_norm());
            r_lieint = r_lieint.max(lieint_residual(&c, &z1, &e)?.residual_norm());
            r_lieleib = r_lieleib.max(lieleib_residual(&c, kw, &w, ke, &e)?.residual_norm());
            r_lielap = r_lielap.max(lielap_residual(&c, &w)?.residual_norm());
        }
    }

    let mut out = vec![
        CheckResult::new("confmet", r_confmet, tolerance, samples),
        CheckResult::new("confkilling", r_confkilling, tolerance, samples),
        CheckResult::new("lietau", r_lietau, tolerance, 1),
        CheckResult::new("liedelta.degree1", r_liedelta1, tolerance, samples),
    ];
    if strong {
        out.push(CheckResult::new("liedelta.strong", r_liedelta, tolerance, samples));
        out.push(CheckResult::new("lieperp", r_lieperp, tolerance, samples));
        out.push(CheckResult::new("lieperp.S", r_lieperp_s, tolerance, samples));
        out.push(CheckResult::new("lieint", r_lieint, tolerance, samples));
        out.push(CheckResult::new("lieleib", r_lieleib, tolerance, samples));
        out.push(CheckResult::new("lielap", r_lielap, tolerance, samples));
    }
    let _ = &mut r_lietau;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::DeltaHandle;
    use crate::scalar::RationalFn;

    fn flat_metric(n: usize) -> Metric<RationalFn> {
        let g: Vec<Vec<RationalFn>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| RationalFn::from_int(n, if i == j { 1 } else { 0 }))
                    .collect()
            })
            .collect();
        Metric::new(g).unwrap()
    }

    /// Euler 1-form Σ x_i dx^i.
    fn euler(m: &Metric<RationalFn>) -> Form<RationalFn> {
        let mut tau = Form::zero(m.n);
        for i in 0..m.n {
            tau = tau
                .add(&m.basis_one_form(i).scalar_mul(&m.coordinate(i)).unwrap())
                .unwrap();
        }
        tau
    }

    /// Special conformal field on flat 3-space:
    /// τ = (x²−y²−z²) dx + 2xy dy + 2xz dz with α = 4x.
    fn special_conformal(m: &Metric<RationalFn>) -> Form<RationalFn> {
        let x = m.coordinate(0);
        let y = m.coordinate(1);
        let z = m.coordinate(2);
        let two = BigRational::from_integer(2.into());
        let cx = x
            .mul(&x)
            .unwrap()
            .sub(&y.mul(&y).unwrap())
            .unwrap()
            .sub(&z.mul(&z).unwrap())
            .unwrap();
        m.basis_one_form(0)
            .scalar_mul(&cx)
            .unwrap()
            .add(&m.basis_one_form(1).scalar_mul(&x.mul(&y).unwrap().scale(&two)).unwrap())
            .unwrap()
            .add(&m.basis_one_form(2).scalar_mul(&x.mul(&z).unwrap().scale(&two)).unwrap())
            .unwrap()
    }

    #[test]
    fn euler_is_conformal_flat2() {
        let m = flat_metric(2);
        let h = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = h.as_fn();
        let tau = euler(&m);
        let data = conformal_data(&m, &delta, &tau).unwrap();
        // α = 2, β = 1
        assert_eq!(data.alpha, m.exemplar.scale(&BigRational::from_integer(2.into())));
        assert_eq!(data.beta, BigRational::from_integer(1.into()));
        let checks = conformal_check(&m, &delta, &tau, 8, 61, 0.0, true).unwrap();
        for c in &checks {
            assert!(c.pass, "{} residual {}", c.id, c.residual);
        }
    }

    #[test]
    fn special_conformal_flat3_strong() {
        let m = flat_metric(3);
        let h = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = h.as_fn();
        let tau = special_conformal(&m);
        let data = conformal_data(&m, &delta, &tau).unwrap();
        // α = 4x — a genuinely non-constant factor so the dα terms matter.
        let four_x = m.coordinate(0).scale(&BigRational::from_integer(4.into()));
        assert_eq!(data.alpha, four_x);
        assert_eq!(data.beta, BigRational::new(3.into(), 2.into()));
        let checks = conformal_check(&m, &delta, &tau, 6, 67, 0.0, true).unwrap();
        for c in &checks {
            assert!(c.pass, "{} residual {}", c.id, c.residual);
        }
    }

    #[test]
    fn non_conformal_tau_fails() {
        let m = flat_metric(2);
        let h = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = h.as_fn();
        // x dy is not conformal Killing on flat space.
        let tau = m.basis_one_form(1).scalar_mul(&m.coordinate(0)).unwrap();
        let checks = conformal_check(&m, &delta, &tau, 8, 71, 0.0, false).unwrap();
        assert!(checks.iter().any(|c| !c.pass));
    }
}

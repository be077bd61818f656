//! Verification suites: seeded, sampled residual checks for every identity
//! family, grouped as `riemann`, `extension`, and `timext`, plus the
//! two-point (Z₂) suite. Each check returns a `CheckResult` keyed by a
//! stable identity id.

use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dga::{ClassicalForms, Dga};
use crate::error::{Error, Result};
use crate::extension::{
    cleft_reconstruct, cocycle_check, construct_flat_cleft, ext2_d, ext2_mul, ext2_project,
    ext2_residual, ext2_sub, ext_mul, ext_sub, perp_gauge, sample_triples, BiMap, ElemMap,
    Ext2Dga, Ext2Element, HostSampler,
};
use crate::forms::{random_form, random_scalar, Chart, Form};
use crate::geometry::{Geometry, GeometryData};
use crate::ncdga::{
    braided_leibniz_check, nc_connection, nc_inner_delta, nc_laplacian, nc_metric_checks,
    nc_ricci_delta, nc_torsion_compat, NcForm, PerpTable, Z2Dga,
};
use crate::report::CheckResult;
use crate::riemann::{
    conformal_check, hodge_laplacian, interior_multi, interior_one, l_delta, levi_connection,
    lie_derivative, metric_compat_scalar, pairing_scalar, perp, ricci_via_delta, theta_map,
    torsion_scalar, weitzenbock, Christoffel, DeltaHandle, Metric,
};
use crate::scalar::Scalar;
use crate::timext::{iterated_line_calculus, spacetime_relations, Semidirect};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Riemann,
    Extension,
    Timext,
    All,
}

impl FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "riemann" => Ok(SuiteKind::Riemann),
            "extension" => Ok(SuiteKind::Extension),
            "timext" => Ok(SuiteKind::Timext),
            "all" => Ok(SuiteKind::All),
            other => Err(Error::Usage(format!(
                "unknown suite '{other}' (expected riemann | extension | timext | all)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub lambda: BigRational,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub tcap: usize,
}

impl SuiteConfig {
    pub fn new(tolerance: f64) -> Self {
        SuiteConfig {
            lambda: BigRational::new(BigInt::from(1), BigInt::from(3)),
            samples: 100,
            seed: 7,
            tolerance,
            tcap: 4,
        }
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn sign_of(deg: usize) -> BigRational {
    if deg % 2 == 0 {
        big(1)
    } else {
        big(-1)
    }
}

fn nonzero_form<S: Scalar, R: Rng>(
    rng: &mut R,
    n: usize,
    degree: usize,
    exemplar: &S,
) -> Form<S> {
    for _ in 0..16 {
        let f = random_form(rng, n, degree, exemplar);
        if !f.is_zero() {
            return f;
        }
    }
    Form::basis_one_form(n, 0, exemplar)
}

// ---------------------------------------------------------------------------
// Riemann suite
// ---------------------------------------------------------------------------

/// All reconstruction and Batalin-Vilkovisky identities for one metric.
pub fn riemann_suite<S: Scalar>(
    m: &Metric<S>,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let n = m.n;
    let p = &m.ginv;
    let ex = &m.exemplar;
    let handle = DeltaHandle::divergence(m.clone())?;
    let delta = handle.as_fn();
    let ch = Christoffel::new(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // regularity: δ(aω) − aδω = i_{da}ω
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let a = random_scalar(&mut rng, n, ex);
        let deg = rng.gen_range(1..=n);
        let w = nonzero_form(&mut rng, n, deg, ex);
        let lhs = delta(&w.scalar_mul(&a)?)?.sub(&delta(&w)?.scalar_mul(&a)?)?;
        let da = Form::scalar(n, a).exterior_d()?;
        let rhs = interior_one(p, &da, &w)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.regularity", worst, tolerance, samples));

    // (delta lie): δ i_ω + i_ω δ = i_{dω} for ω ∈ Ω¹
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let w = nonzero_form(&mut rng, n, 1, ex);
        let deg = rng.gen_range(1..=n);
        let e = nonzero_form(&mut rng, n, deg, ex);
        let lhs = delta(&interior_one(p, &w, &e)?)?.add(&interior_one(p, &w, &delta(&e)?)?)?;
        let rhs = interior_multi(p, &w.exterior_d()?, &e)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.delta_lie", worst, tolerance, samples));

    // Lemma Schouten first display, ζ ∈ Ω¹:
    // i_ζ L_δ(ω,η) = −L_δ(i_ζω,η) − (−1)^{|ω|}L_δ(ω,i_ζη) + L_{i_dζ}(ω,η)
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let dw = rng.gen_range(1..=n);
        let de = rng.gen_range(1..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let e = nonzero_form(&mut rng, n, de, ex);
        let z = nonzero_form(&mut rng, n, 1, ex);
        let lhs = interior_one(p, &z, &l_delta(&delta, &w, &e)?)?;
        let idz = |f: &Form<S>| interior_multi(p, &z.exterior_d()?, f);
        let lb = idz(&w.wedge(&e)?)?
            .sub(&idz(&w)?.wedge(&e)?)?
            .sub(&w.wedge(&idz(&e)?)?)?;
        let rhs = l_delta(&delta, &interior_one(p, &z, &w)?, &e)?
            .neg()
            .sub(&l_delta(&delta, &w, &interior_one(p, &z, &e)?)?.scale(&sign_of(dw)))?
            .add(&lb)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.schouten", worst, tolerance, samples));

    // Corollary delta-triple, the 7-term BV identity
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let dw = rng.gen_range(0..=n);
        let de = rng.gen_range(0..=n);
        let dz = rng.gen_range(0..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let e = nonzero_form(&mut rng, n, de, ex);
        let z = nonzero_form(&mut rng, n, dz, ex);
        let lhs = delta(&w.wedge(&e)?.wedge(&z)?)?;
        let rhs = delta(&w.wedge(&e)?)?
            .wedge(&z)?
            .add(&w.wedge(&delta(&e.wedge(&z)?)?)?.scale(&sign_of(dw)))?
            .add(
                &e.wedge(&delta(&w.wedge(&z)?)?)?
                    .scale(&sign_of((dw + 1) * de)),
            )?
            .sub(&delta(&w)?.wedge(&e)?.wedge(&z)?)?
            .sub(&w.wedge(&delta(&e)?)?.wedge(&z)?.scale(&sign_of(dw)))?
            .sub(&w.wedge(&e)?.wedge(&delta(&z)?)?.scale(&sign_of(dw + de)))?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.bv7", worst, tolerance, samples));

    // (L1) for L_δ
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let dw = rng.gen_range(0..=n);
        let de = rng.gen_range(0..=n);
        let dz = rng.gen_range(0..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let e = nonzero_form(&mut rng, n, de, ex);
        let z = nonzero_form(&mut rng, n, dz, ex);
        let lhs = l_delta(&delta, &w.wedge(&e)?, &z)?.add(&l_delta(&delta, &w, &e)?.wedge(&z)?)?;
        let rhs = l_delta(&delta, &w, &e.wedge(&z)?)?
            .add(&w.wedge(&l_delta(&delta, &e, &z)?)?.scale(&sign_of(dw)))?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.l1", worst, tolerance, samples));

    // (L2): L_Δ(ω,η) = dL_δ(ω,η) + L_δ(dω,η) + (−1)^{|ω|}L_δ(ω,dη)
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let dw = rng.gen_range(0..=n);
        let de = rng.gen_range(0..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let e = nonzero_form(&mut rng, n, de, ex);
        let lap = |f: &Form<S>| hodge_laplacian(&delta, f);
        let lhs = lap(&w.wedge(&e)?)?
            .sub(&lap(&w)?.wedge(&e)?)?
            .sub(&w.wedge(&lap(&e)?)?)?;
        let rhs = l_delta(&delta, &w, &e)?
            .exterior_d()?
            .add(&l_delta(&delta, &w.exterior_d()?, &e)?)?
            .add(&l_delta(&delta, &w, &e.exterior_d()?)?.scale(&sign_of(dw)))?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.l2", worst, tolerance, samples));

    // (liehigher): ω ∈ Ω¹, η, ζ ∈ Ω²
    let mut worst = 0.0_f64;
    if n >= 2 {
        for _ in 0..samples {
            let w = nonzero_form(&mut rng, n, 1, ex);
            let e = nonzero_form(&mut rng, n, 2, ex);
            let z = nonzero_form(&mut rng, n, 2, ex);
            let lhs = interior_multi(p, &z, &l_delta(&delta, &w, &e)?)?;
            let rhs = interior_one(p, &w, &interior_multi(p, &e, &z)?.exterior_d()?)?
                .sub(&interior_multi(p, &e, &interior_one(p, &w, &z)?.exterior_d()?)?)?
                .sub(&interior_multi(p, &e, &interior_one(p, &w, &z.exterior_d()?)?)?)?;
            worst = worst.max(lhs.sub(&rhs)?.residual_norm());
        }
    }
    out.push(CheckResult::new("riemann.liehigher", worst, tolerance, samples));

    // (comrel): [i_η, ∇_ω] = −i_{∇_ωη} on all degrees
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let w = nonzero_form(&mut rng, n, 1, ex);
        let e = nonzero_form(&mut rng, n, 1, ex);
        let dz = rng.gen_range(1..=n);
        let z = nonzero_form(&mut rng, n, dz, ex);
        let lhs = interior_one(p, &e, &levi_connection(p, &delta, &w, &z)?)?
            .sub(&levi_connection(p, &delta, &w, &interior_one(p, &e, &z)?)?)?;
        let rhs = interior_one(p, &levi_connection(p, &delta, &w, &e)?, &z)?.neg();
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.comrel", worst, tolerance, samples));

    // (connpm) both displays
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let w = nonzero_form(&mut rng, n, 1, ex);
        let e = nonzero_form(&mut rng, n, 1, ex);
        let nwe = levi_connection(p, &delta, &w, &e)?;
        let new = levi_connection(p, &delta, &e, &w)?;
        let anti = nwe.sub(&new)?.sub(&l_delta(&delta, &w, &e)?)?;
        let pair = pairing_scalar(p, &w, &e, ex)?;
        let sym = nwe
            .add(&new)?
            .sub(&lie_derivative(p, &w, &e)?)?
            .sub(&lie_derivative(p, &e, &w)?)?
            .add(&Form::scalar(n, pair).exterior_d()?)?;
        worst = worst.max(anti.residual_norm()).max(sym.residual_norm());
    }
    out.push(CheckResult::new("riemann.connpm", worst, tolerance, samples));

    // Levi-Civita reconstruction vs the Christoffel oracle
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..n {
            let w = m.basis_one_form(i);
            let e = m.basis_one_form(j);
            let rec = levi_connection(p, &delta, &w, &e)?;
            let oracle = ch.nabla_form(m, &w, &e)?;
            worst = worst.max(rec.sub(&oracle)?.residual_norm());
            count += 1;
        }
    }
    for _ in 0..samples.min(50) {
        let w = nonzero_form(&mut rng, n, 1, ex);
        let de = rng.gen_range(1..=n);
        let e = nonzero_form(&mut rng, n, de, ex);
        let rec = levi_connection(p, &delta, &w, &e)?;
        let oracle = ch.nabla_form(m, &w, &e)?;
        worst = worst.max(rec.sub(&oracle)?.residual_norm());
        count += 1;
    }
    out.push(CheckResult::new("riemann.levi_oracle", worst, tolerance, count));

    // torsion and metric compatibility vanish
    let mut worst_t = 0.0_f64;
    let mut worst_c = 0.0_f64;
    for _ in 0..samples {
        let w = nonzero_form(&mut rng, n, 1, ex);
        let e = nonzero_form(&mut rng, n, 1, ex);
        let z = nonzero_form(&mut rng, n, 1, ex);
        worst_t = worst_t.max(torsion_scalar(p, &delta, &w, &e, &z, ex)?.residual_norm());
        worst_c = worst_c.max(metric_compat_scalar(p, &delta, &w, &e, &z, ex)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.torsion", worst_t, tolerance, samples));
    out.push(CheckResult::new("riemann.compat", worst_c, tolerance, samples));

    // dω = g¹∇_{g²}ω and g¹∇_{g²}(da) = 0
    let mut worst = 0.0_f64;
    for _ in 0..samples.min(20) {
        let dw = rng.gen_range(0..n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let mut acc = Form::zero(n);
        for i in 0..n {
            for j in 0..n {
                if m.g[i][j].is_zero() {
                    continue;
                }
                let term = m
                    .basis_one_form(i)
                    .wedge(&levi_connection(p, &delta, &m.basis_one_form(j), &w)?)?
                    .scalar_mul(&m.g[i][j])?;
                acc = acc.add(&term)?;
            }
        }
        worst = worst.max(acc.sub(&w.exterior_d()?)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.divzero", worst, tolerance, samples.min(20)));

    // classical ⊥ 4-term identity
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let dw = rng.gen_range(1..=n);
        let de = rng.gen_range(1..=n);
        let dz = rng.gen_range(1..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let e = nonzero_form(&mut rng, n, de, ex);
        let z = nonzero_form(&mut rng, n, dz, ex);
        let lhs = perp(p, &w.wedge(&e)?, &z)?
            .scale(&sign_of(de))
            .add(&perp(p, &w, &e)?.wedge(&z)?)?;
        let rhs = perp(p, &w, &e.wedge(&z)?)?
            .add(&w.wedge(&perp(p, &e, &z)?)?.scale(&sign_of(dw + de)))?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.fourterm", worst, tolerance, samples));

    // Weitzenbock tensoriality
    let mut worst = 0.0_f64;
    for _ in 0..samples.min(20) {
        let a = random_scalar(&mut rng, n, ex);
        let dw = rng.gen_range(1..=n);
        let w = nonzero_form(&mut rng, n, dw, ex);
        let lhs = weitzenbock(m, &delta, &w.scalar_mul(&a)?)?;
        let rhs = weitzenbock(m, &delta, &w)?.scalar_mul(&a)?;
        worst = worst.max(lhs.sub(&rhs)?.residual_norm());
    }
    out.push(CheckResult::new("riemann.weitzenbock", worst, tolerance, samples.min(20)));

    // Ricci = −½Δ(g) against the Christoffel oracle
    let ric = ricci_via_delta(m, &delta)?;
    let oracle = ch.ricci_matrix(ex)?;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max(ric.entries[i][j].sub(&oracle[i][j])?.residual_norm());
        }
    }
    out.push(CheckResult::new("riemann.ricci", worst, tolerance, n * n));

    // Θ fiber invariance: Θ(δ + ⌊_v) = Θ(δ)
    let theta0 = theta_map(n, ex, &delta)?;
    let mut worst = 0.0_f64;
    for _ in 0..5usize {
        let v: Vec<S> = (0..n).map(|_| random_scalar(&mut rng, n, ex)).collect();
        let shifted = DeltaHandle::divergence_plus(m.clone(), v)?;
        let theta1 = theta_map(n, ex, &shifted.as_fn())?;
        for i in 0..n {
            for j in 0..n {
                worst = worst
                    .max(theta0.pairing[i][j].sub(&theta1.pairing[i][j])?.residual_norm());
            }
        }
    }
    out.push(CheckResult::new("riemann.theta_fiber", worst, tolerance, 5));

    Ok(out)
}

// ---------------------------------------------------------------------------
// Extension suite
// ---------------------------------------------------------------------------

/// Cleft central extension checks over the classical forms of one metric:
/// cocycle conditions, algebra laws of Ω̃ and Ω̃̃, cleftness,
/// reconstruction round trip, and gauge invariance.
pub fn extension_suite<S: Scalar>(
    m: &Metric<S>,
    chart: &Chart,
    lambda: &BigRational,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let n = m.n;
    let host = ClassicalForms::new(n, m.exemplar.clone(), chart.clone());
    let handle = DeltaHandle::divergence(m.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let perp_map: BiMap<Form<S>> = Rc::new(|w, e| perp(&m.ginv, w, e));
    let delta_map: ElemMap<Form<S>> = Rc::new(|w| handle.apply(w));
    let triples = sample_triples(&host, &mut rng, samples.max(8), 2)?;
    let functions: Vec<Form<S>> = (0..4)
        .map(|_| host.sample(&mut rng, 0))
        .collect::<Result<_>>()?;
    let data = construct_flat_cleft(
        &host,
        perp_map.clone(),
        delta_map.clone(),
        lambda.clone(),
        &triples,
        &functions,
        tolerance,
    )?;
    out.push(CheckResult::new("extension.construct", 0.0, tolerance, triples.len()));

    for check in cocycle_check(&host, &data.cocycle, &triples, tolerance)? {
        out.push(CheckResult::new(
            &format!("extension.{}", check.id),
            check.residual,
            tolerance,
            check.samples,
        ));
    }

    // cleftness: ⟦a, ω⟧ = 0 for functions a
    let mut worst = 0.0_f64;
    for a in &functions {
        for (w, _, _) in triples.iter().take(8) {
            worst = worst.max(host.residual_norm(&(data.cocycle.bracket)(a, w)?));
        }
    }
    out.push(CheckResult::new("extension.cleft", worst, tolerance, functions.len() * 8));

    // Ω̃ algebra laws and Ω̃̃ laws via the Ext2 DGA
    let ext = Ext2Dga::new(&host, &data);
    let budget = host.sample_budget();
    let mut worst_assoc = 0.0_f64;
    let mut worst_leib = 0.0_f64;
    let mut worst_dsq = 0.0_f64;
    let mut worst_central = 0.0_f64;
    let mut worst_proj = 0.0_f64;
    let theta_p = ext.theta_prime();
    for _ in 0..samples {
        let dw = rng.gen_range(0..=budget);
        let x = sample_ext2(&mut rng, &host, dw)?;
        let dy = rng.gen_range(0..=budget);
        let dz = rng.gen_range(0..=budget);
        let y = sample_ext2(&mut rng, &host, dy)?;
        let z = sample_ext2(&mut rng, &host, dz)?;
        let left = ext2_mul(&host, &data, &ext2_mul(&host, &data, &x, &y)?, &z)?;
        let right = ext2_mul(&host, &data, &x, &ext2_mul(&host, &data, &y, &z)?)?;
        worst_assoc = worst_assoc.max(ext2_residual(&host, &ext2_sub(&host, &left, &right)?));

        let dl = ext2_d(&host, &data, &ext2_mul(&host, &data, &x, &y)?)?;
        let t1 = ext2_mul(&host, &data, &ext2_d(&host, &data, &x)?, &y)?;
        let mut t2 = ext2_mul(&host, &data, &x, &ext2_d(&host, &data, &y)?)?;
        if dw % 2 != 0 {
            t2 = Ext2Element {
                body: t2.body.neg(),
                prime: t2.prime.neg(),
                dprime: t2.dprime.neg(),
            };
        }
        let dr = Ext2Element {
            body: t1.body.add(&t2.body)?,
            prime: t1.prime.add(&t2.prime)?,
            dprime: t1.dprime.add(&t2.dprime)?,
        };
        worst_leib = worst_leib.max(ext2_residual(&host, &ext2_sub(&host, &dl, &dr)?));

        let dd = ext2_d(&host, &data, &ext2_d(&host, &data, &x)?)?;
        worst_dsq = worst_dsq.max(ext2_residual(&host, &dd));

        // θ′ graded-centrality
        let sign = sign_of(dw);
        let xt = ext2_mul(&host, &data, &x, &theta_p)?;
        let tx = ext2_mul(&host, &data, &theta_p, &x)?;
        let scaled = Ext2Element {
            body: xt.body.scale(&sign),
            prime: xt.prime.scale(&sign),
            dprime: xt.dprime.scale(&sign),
        };
        worst_central =
            worst_central.max(ext2_residual(&host, &ext2_sub(&host, &tx, &scaled)?));

        // the surjections Ω̃̃ → Ω̃ and Ω̃ → Ω are DGA maps
        let pm = ext2_project(&ext2_mul(&host, &data, &x, &y)?);
        let mp = ext_mul(
            &host,
            &data.cocycle,
            &ext2_project(&x),
            &ext2_project(&y),
        )?;
        let d1 = ext_sub(&host, &pm, &mp)?;
        worst_proj = worst_proj
            .max(host.residual_norm(&d1.body))
            .max(host.residual_norm(&d1.prime));
        // body projection Ω̃ → Ω is multiplicative because prime terms
        // never feed back into body
        let body_diff = host.sub(&pm.body, &host.mul(&x.body, &y.body)?)?;
        worst_proj = worst_proj.max(host.residual_norm(&body_diff));
    }
    out.push(CheckResult::new("extension.assoc", worst_assoc, tolerance, samples));
    out.push(CheckResult::new("extension.leibniz", worst_leib, tolerance, samples));
    out.push(CheckResult::new("extension.dsq", worst_dsq, tolerance, samples));
    out.push(CheckResult::new("extension.theta_central", worst_central, tolerance, samples));
    out.push(CheckResult::new("extension.project", worst_proj, tolerance, samples));

    // reconstruction round trip from Δ alone
    let lap: ElemMap<Form<S>> = {
        let delta_map = delta_map.clone();
        Rc::new(move |w: &Form<S>| {
            delta_map(&w.exterior_d()?)?.add(&delta_map(w)?.exterior_d()?)
        })
    };
    let rec = cleft_reconstruct(&host, lap, lambda.clone(), &triples, tolerance)?;
    let mut worst = 0.0_f64;
    for (w, e, _) in triples.iter().take(samples.min(30)) {
        let a = (rec.bracket)(w, e)?;
        let b = (data.cocycle.bracket)(w, e)?;
        worst = worst.max(host.residual_norm(&host.sub(&a, &b)?));
    }
    out.push(CheckResult::new(
        "extension.reconstruct",
        worst,
        tolerance,
        samples.min(30),
    ));

    // gauge invariance under three bimodule maps B of degree −2
    let module_samples: Vec<(Form<S>, Form<S>)> = (0..6)
        .map(|_| {
            let a = host.sample(&mut rng, 0)?;
            let dd = rng.gen_range(2..=n.max(2));
            Ok((a, nonzero_form(&mut rng, n, dd.min(n), &m.exemplar)))
        })
        .collect::<Result<_>>()?;
    let zeta_coeffs: Vec<S> = vec![
        m.exemplar.one_like(),
        m.coordinate(0),
        m.exemplar.one_like().scale(&BigRational::new(BigInt::from(-5), BigInt::from(3))),
    ];
    let mut worst = 0.0_f64;
    for c in zeta_coeffs {
        let zeta = m
            .basis_one_form(0)
            .wedge(&m.basis_one_form(1))?
            .scalar_mul(&c)?;
        let b_map: ElemMap<Form<S>> = Rc::new(move |w| interior_multi(&m.ginv, &zeta, w));
        let (perp2, delta2) = perp_gauge(
            &host,
            b_map,
            perp_map.clone(),
            delta_map.clone(),
            &module_samples,
            tolerance,
        )?;
        let data2 = construct_flat_cleft(
            &host,
            perp2,
            delta2,
            lambda.clone(),
            &triples,
            &functions,
            tolerance,
        )?;
        for (w, e, _) in triples.iter().take(10) {
            let b1 = (data.cocycle.bracket)(w, e)?;
            let b2 = (data2.cocycle.bracket)(w, e)?;
            worst = worst.max(host.residual_norm(&host.sub(&b1, &b2)?));
            let l1 = (data.cocycle.laplacian)(w)?;
            let l2 = (data2.cocycle.laplacian)(w)?;
            worst = worst.max(host.residual_norm(&host.sub(&l1, &l2)?));
        }
    }
    out.push(CheckResult::new("extension.gauge", worst, tolerance, 30));

    Ok(out)
}

fn sample_ext2<S: Scalar, R: Rng>(
    rng: &mut R,
    host: &ClassicalForms<S>,
    degree: usize,
) -> Result<Ext2Element<Form<S>>> {
    let n = host.n;
    let body = random_form(rng, n, degree, &host.exemplar);
    let prime = if degree >= 1 {
        random_form(rng, n, degree - 1, &host.exemplar)
    } else {
        Form::zero(n)
    };
    let dprime = if degree >= 2 {
        random_form(rng, n, degree - 2, &host.exemplar)
    } else {
        Form::zero(n)
    };
    Ok(Ext2Element { body, prime, dprime })
}

// ---------------------------------------------------------------------------
// Time-extension suite
// ---------------------------------------------------------------------------

/// Line calculus and semidirect product checks; when the geometry carries a
/// conformal 1-form, also the strong δ-conformal suite and the quantized
/// spacetime relation table.
pub fn timext_suite<S: Scalar>(
    m: &Metric<S>,
    chart: &Chart,
    conformal: Option<&Form<S>>,
    lambda: &BigRational,
    tcap: usize,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let n = m.n;
    let host = ClassicalForms::new(n, m.exemplar.clone(), chart.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<CheckResult> = Vec::new();

    // iterated line calculi, aggregated over n = 1, 2, 3
    use std::collections::BTreeMap;
    let mut agg: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for levels in 1..=3usize {
        for c in iterated_line_calculus(levels, lambda.clone(), tcap.max(3), tolerance)? {
            let slot = agg.entry(c.id).or_insert((0.0, 0));
            slot.0 = slot.0.max(c.residual);
            slot.1 += c.samples;
        }
    }
    for (id, (residual, count)) in agg {
        out.push(CheckResult::new(&id, residual, tolerance, count));
    }

    // semidirect product with τ = 0 over the geometry's forms
    let semi = Semidirect::new(&host, None, lambda.clone(), tcap)?;
    let t_el = semi.t();
    let dt_el = semi.dt();
    let mut worst_comm = 0.0_f64;
    let mut worst_dt = 0.0_f64;
    let mut worst_assoc = 0.0_f64;
    let mut worst_dsq = 0.0_f64;
    for _ in 0..samples.min(40) {
        let deg = rng.gen_range(0..=n);
        let w = nonzero_form(&mut rng, n, deg, &m.exemplar);
        let wl = semi.lift(w.clone());
        // [ω, t] = λ|ω|ω
        let comm = semi.sub(&semi.mul(&wl, &t_el)?, &semi.mul(&t_el, &wl)?)?;
        let expected = semi.scale(&wl, &(lambda * big(deg as i64)));
        worst_comm = worst_comm.max(semi.residual_norm(&semi.sub(&comm, &expected)?));
        // [dt, ω} = λ dω
        let br = if deg % 2 == 0 {
            semi.sub(&semi.mul(&dt_el, &wl)?, &semi.mul(&wl, &dt_el)?)?
        } else {
            semi.add(&semi.mul(&dt_el, &wl)?, &semi.mul(&wl, &dt_el)?)?
        };
        let expected = semi.scale(&semi.lift(w.exterior_d()?), lambda);
        worst_dt = worst_dt.max(semi.residual_norm(&semi.sub(&br, &expected)?));
        // associativity and d² on mixed elements
        let mut x = semi.zero();
        let d1 = rng.gen_range(0..=n);
        let d2 = rng.gen_range(0..=n);
        let d3 = rng.gen_range(0..=n);
        x.body[1] = random_form(&mut rng, n, d1, &m.exemplar);
        x.dt[0] = random_form(&mut rng, n, d2, &m.exemplar);
        let y = semi.lift(nonzero_form(&mut rng, n, d3, &m.exemplar));
        let z = semi.add(&t_el, &dt_el)?;
        let left = semi.mul(&semi.mul(&x, &y)?, &z)?;
        let right = semi.mul(&x, &semi.mul(&y, &z)?)?;
        worst_assoc = worst_assoc.max(semi.residual_norm(&semi.sub(&left, &right)?));
        worst_dsq = worst_dsq.max(semi.residual_norm(&semi.d(&semi.d(&x)?)?));
    }
    out.push(CheckResult::new("timext.tau0.commute", worst_comm, tolerance, samples.min(40)));
    out.push(CheckResult::new("timext.tau0.dt", worst_dt, tolerance, samples.min(40)));
    out.push(CheckResult::new("timext.assoc", worst_assoc, tolerance, samples.min(40)));
    out.push(CheckResult::new("timext.dsq", worst_dsq, tolerance, samples.min(40)));

    if let Some(tau) = conformal {
        let handle = DeltaHandle::divergence(m.clone())?;
        let delta = handle.as_fn();
        out.extend(conformal_check(
            m,
            &delta,
            tau,
            samples.min(20),
            seed.wrapping_add(9),
            tolerance,
            true,
        )?);
        out.extend(spacetime_relations(
            m,
            tau,
            lambda.clone(),
            tcap,
            samples.min(6),
            seed.wrapping_add(10),
            tolerance,
        )?);
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// Z₂ two-point suite
// ---------------------------------------------------------------------------

/// The noncommutative two-point example: ⊥ four-term identity, metric and
/// operator value checks, braided Leibniz, torsion compatibility, Ricci
/// plumbing, and the inner flat cleft extension with reconstruction.
pub fn z2_suite(
    cap: usize,
    lambda: &BigRational,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    let p = PerpTable::standard();
    let mut out = Vec::new();
    let prefix = |c: CheckResult| {
        CheckResult::new(&format!("z2.{}", c.id), c.residual, c.tolerance, c.samples)
    };
    out.push(prefix(p.four_term_check(cap)?));
    out.extend(nc_metric_checks(&p, cap, seed, samples)?.into_iter().map(prefix));
    out.extend(braided_leibniz_check(&p, cap, seed.wrapping_add(1), samples)?
        .into_iter()
        .map(prefix));
    out.extend(nc_torsion_compat(&p, cap, seed.wrapping_add(2), samples)?
        .into_iter()
        .map(prefix));
    out.extend(nc_ricci_delta(&p, cap, seed.wrapping_add(3), samples)?
        .into_iter()
        .map(prefix));

    // inner flat cleft extension over the Z₂ DGA
    let alg = Z2Dga::new(cap);
    let p2 = PerpTable::standard();
    let perp_map: BiMap<NcForm> = Rc::new(move |w, e| p2.perp(w, e));
    let p3 = PerpTable::standard();
    let delta_map: ElemMap<NcForm> = Rc::new(move |w| nc_inner_delta(&p3, w));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let triples = sample_triples(&alg, &mut rng, samples.max(8), 2)?;
    let functions: Vec<NcForm> = (0..3)
        .map(|_| alg.sample(&mut rng, 0))
        .collect::<Result<_>>()?;
    let data = construct_flat_cleft(
        &alg,
        perp_map,
        delta_map,
        lambda.clone(),
        &triples,
        &functions,
        0.0,
    )?;
    for check in cocycle_check(&alg, &data.cocycle, &triples, 0.0)? {
        out.push(CheckResult::new(
            &format!("z2.extension.{}", check.id),
            check.residual,
            0.0,
            check.samples,
        ));
    }
    // ⟦ω, ·⟧ = 2∇_ω against the inner connection
    let pt = PerpTable::standard();
    let mut worst = 0.0_f64;
    for (w, e, _) in triples.iter().take(samples.min(20)) {
        if alg.is_zero(w) || alg.is_zero(e) || w.degree() == Some(0) {
            continue;
        }
        let br = (data.cocycle.bracket)(w, e)?;
        let expected = nc_connection(&pt, w, e)?.scale(&big(2));
        worst = worst.max(alg.residual_norm(&alg.sub(&br, &expected)?));
    }
    out.push(CheckResult::new("z2.bracket_is_2nabla", worst, 0.0, samples.min(20)));

    // reconstruction round trip from Δ alone
    let p4 = PerpTable::standard();
    let lap: ElemMap<NcForm> = Rc::new(move |w| nc_laplacian(&p4, w));
    let rec = cleft_reconstruct(&alg, lap, lambda.clone(), &triples, 0.0)?;
    let mut worst = 0.0_f64;
    for (w, e, _) in triples.iter().take(samples.min(20)) {
        let a = (rec.bracket)(w, e)?;
        let b = (data.cocycle.bracket)(w, e)?;
        worst = worst.max(alg.residual_norm(&alg.sub(&a, &b)?));
    }
    out.push(CheckResult::new("z2.reconstruct", worst, 0.0, samples.min(20)));

    Ok(out)
}

// ---------------------------------------------------------------------------
// Dispatch over geometries
// ---------------------------------------------------------------------------

fn run_for<S: Scalar>(
    g: &GeometryData<S>,
    kind: SuiteKind,
    cfg: &SuiteConfig,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    if matches!(kind, SuiteKind::Riemann | SuiteKind::All) {
        out.extend(riemann_suite(&g.metric, cfg.samples, cfg.seed, cfg.tolerance)?);
    }
    if matches!(kind, SuiteKind::Extension | SuiteKind::All) {
        out.extend(extension_suite(
            &g.metric,
            &g.chart,
            &cfg.lambda,
            cfg.samples,
            cfg.seed.wrapping_add(1),
            cfg.tolerance,
        )?);
    }
    if matches!(kind, SuiteKind::Timext | SuiteKind::All) {
        out.extend(timext_suite(
            &g.metric,
            &g.chart,
            g.conformal.as_ref(),
            &cfg.lambda,
            cfg.tcap,
            cfg.samples,
            cfg.seed.wrapping_add(2),
            cfg.tolerance,
        )?);
    }
    Ok(out)
}

/// Run the selected suites against a geometry.
pub fn run_suite(geo: &Geometry, kind: SuiteKind, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    match geo {
        Geometry::Rational(g) => run_for(g, kind, cfg),
        Geometry::Jets(g) => run_for(g, kind, cfg),
    }
}

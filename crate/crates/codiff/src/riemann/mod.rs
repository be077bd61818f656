//! Riemannian structure from a codifferential: metric data, the classical
//! Christoffel oracle, the pairing-level operations (interior products, the
//! degree −2 product ⊥, Lie derivatives along 1-forms), codifferentials in
//! divergence and Hodge form, and the reconstruction of the Levi-Civita
//! connection, torsion, curvature, Laplacians and Ricci from δ alone.

pub mod conformal;

pub use conformal::{conformal_check, conformal_data, ConformalData};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::forms::{leibnizator, merge_sign, Form, TensorForm};
use crate::scalar::{MultiPoly, Scalar};

/// Any degree 0/±1 operator on forms presented as a closure.
pub type FormMap<'a, S> = &'a dyn Fn(&Form<S>) -> Result<Form<S>>;

fn mask_indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::new();
    let mut bits = mask;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        out.push(i);
    }
    out
}

/// Gauss-Jordan inversion with determinant, over any coefficient ring with
/// decidable invertibility.
pub fn invert_matrix<S: Scalar>(m: &[Vec<S>]) -> Result<(Vec<Vec<S>>, S)> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidMetric("matrix is not square".into()));
    }
    let ex = &m[0][0];
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ex.one_like() } else { ex.zero_like() })
                .collect()
        })
        .collect();
    let mut det = ex.one_like();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !a[r][col].is_zero() && a[r][col].inverse().is_ok())
            .ok_or_else(|| Error::InvalidMetric("matrix is singular".into()))?;
        if pivot_row != col {
            a.swap(pivot_row, col);
            inv.swap(pivot_row, col);
            det = det.neg();
        }
        let pivot = a[col][col].clone();
        det = det.mul(&pivot)?;
        let pinv = pivot.inverse()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pinv)?;
            inv[col][j] = inv[col][j].mul(&pinv)?;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = factor.mul(&a[col][j])?;
                a[r][j] = a[r][j].sub(&t)?;
                let t = factor.mul(&inv[col][j])?;
                inv[r][j] = inv[r][j].sub(&t)?;
            }
        }
    }
    Ok((inv, det))
}

/// Metric data on an n-coordinate chart: g, its inverse (the pairing
/// matrix (dx^i, dx^j) = g^{ij}), and det g.
#[derive(Debug, Clone)]
pub struct Metric<S: Scalar> {
    pub n: usize,
    pub g: Vec<Vec<S>>,
    pub ginv: Vec<Vec<S>>,
    pub det: S,
    pub exemplar: S,
}

impl<S: Scalar> Metric<S> {
    pub fn new(g: Vec<Vec<S>>) -> Result<Self> {
        let n = g.len();
        if n == 0 || g.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric("metric matrix is not square".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if g[i][j].sub(&g[j][i])?.is_zero() == false {
                    return Err(Error::InvalidMetric(format!(
                        "metric is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let (ginv, det) = invert_matrix(&g)?;
        let exemplar = g[0][0].one_like();
        Ok(Metric { n, g, ginv, det, exemplar })
    }

    /// g = g_ij dx^i ⊗ dx^j as a tensor form.
    pub fn metric_tensor(&self) -> TensorForm<S> {
        TensorForm { n: self.n, entries: self.g.clone() }
    }

    pub fn basis_one_form(&self, i: usize) -> Form<S> {
        Form::basis_one_form(self.n, i, &self.exemplar)
    }

    /// Scalar coordinate x_i embedded into the coefficient ring.
    pub fn coordinate(&self, i: usize) -> S {
        self.exemplar.from_poly(&MultiPoly::var(self.n, i))
    }
}

/// Classical Christoffel symbols Γ^k_{ij} and the coordinate covariant
/// derivative: the independent oracle every reconstruction is tested
/// against.
#[derive(Debug, Clone)]
pub struct Christoffel<S: Scalar> {
    pub n: usize,
    /// gamma[k][i][j] = Γ^k_{ij}
    pub gamma: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> Christoffel<S> {
    pub fn new(m: &Metric<S>) -> Result<Self> {
        let n = m.n;
        let half = BigRational::new(1.into(), 2.into());
        let mut gamma = vec![vec![vec![m.exemplar.zero_like(); n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = m.exemplar.zero_like();
                    for l in 0..n {
                        let t = m.g[l][j]
                            .partial(i)?
                            .add(&m.g[l][i].partial(j)?)?
                            .sub(&m.g[i][j].partial(l)?)?;
                        acc = acc.add(&m.ginv[k][l].mul(&t)?)?;
                    }
                    gamma[k][i][j] = acc.scale(&half);
                }
            }
        }
        Ok(Christoffel { n, gamma })
    }

    /// ∇_{∂_l} on forms: ∂_l on coefficients plus the term replacing each
    /// dx^a by −Γ^a_{lm} dx^m in place.
    pub fn nabla_coord(&self, l: usize, eta: &Form<S>) -> Result<Form<S>> {
        let n = self.n;
        let mut out = Form::zero(n);
        for (mask, c) in &eta.terms {
            out.add_term(*mask, c.partial(l)?);
            for a in mask_indices(*mask) {
                let rest = mask & !(1u32 << a);
                // dx^mask = (−1)^{pos(a)} dx^a ∧ dx^rest
                let pos_sign = if (mask & ((1u32 << a) - 1)).count_ones() % 2 == 0 {
                    1
                } else {
                    -1
                };
                for mm in 0..n {
                    let bit = 1u32 << mm;
                    if rest & bit != 0 {
                        continue;
                    }
                    let gam = &self.gamma[a][l][mm];
                    if gam.is_zero() {
                        continue;
                    }
                    let ins_sign = if (rest & (bit - 1)).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    let mut coeff = c.mul(gam)?.neg();
                    if pos_sign * ins_sign < 0 {
                        coeff = coeff.neg();
                    }
                    out.add_term(rest | bit, coeff);
                }
            }
        }
        Ok(out)
    }

    /// ∇_ω along a 1-form: ∇ along the metrically dual vector field,
    /// tensorial in ω.
    pub fn nabla_form(&self, m: &Metric<S>, omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
        if omega.degree().unwrap_or(1) != 1 {
            return Err(Error::DegreeError("∇ direction must be a 1-form".into()));
        }
        let mut out = Form::zero(self.n);
        let x = vector_of(&m.ginv, omega, &m.exemplar)?;
        for (j, xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            out = out.add(&self.nabla_coord(j, eta)?.scalar_mul(xj)?)?;
        }
        Ok(out)
    }

    /// Ric_{ij} = ∂_k Γ^k_{ij} − ∂_i Γ^k_{kj} + Γ^k_{kl}Γ^l_{ij}
    /// − Γ^k_{il}Γ^l_{kj}, summed over repeated indices.
    pub fn ricci_matrix(&self, exemplar: &S) -> Result<Vec<Vec<S>>> {
        let n = self.n;
        let mut ric = vec![vec![exemplar.zero_like(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = exemplar.zero_like();
                for k in 0..n {
                    acc = acc.add(&self.gamma[k][i][j].partial(k)?)?;
                    acc = acc.sub(&self.gamma[k][k][j].partial(i)?)?;
                    for l in 0..n {
                        acc = acc.add(&self.gamma[k][k][l].mul(&self.gamma[l][i][j])?)?;
                        acc = acc.sub(&self.gamma[k][i][l].mul(&self.gamma[l][k][j])?)?;
                    }
                }
                ric[i][j] = acc;
            }
        }
        Ok(ric)
    }
}

/// Components of the vector field metrically dual to a 1-form:
/// X^j = Σ_i ω_i p^{ij} for a pairing matrix p.
pub fn vector_of<S: Scalar>(p: &[Vec<S>], omega: &Form<S>, exemplar: &S) -> Result<Vec<S>> {
    let n = p.len();
    let mut x = vec![exemplar.zero_like(); n];
    for (mask, c) in &omega.terms {
        if mask.count_ones() != 1 {
            return Err(Error::DegreeError("expected a 1-form".into()));
        }
        let i = mask.trailing_zeros() as usize;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = xj.add(&c.mul(&p[i][j])?)?;
        }
    }
    Ok(x)
}

/// Symmetric pairing of two 1-forms, (ω, η) = Σ ω_i p^{ij} η_j.
pub fn pairing_scalar<S: Scalar>(
    p: &[Vec<S>],
    omega: &Form<S>,
    eta: &Form<S>,
    exemplar: &S,
) -> Result<S> {
    let mut acc = exemplar.zero_like();
    for (ma, ca) in &omega.terms {
        if ma.count_ones() != 1 {
            return Err(Error::DegreeError("pairing expects 1-forms".into()));
        }
        let i = ma.trailing_zeros() as usize;
        for (mb, cb) in &eta.terms {
            if mb.count_ones() != 1 {
                return Err(Error::DegreeError("pairing expects 1-forms".into()));
            }
            let j = mb.trailing_zeros() as usize;
            acc = acc.add(&ca.mul(&p[i][j])?.mul(cb)?)?;
        }
    }
    Ok(acc)
}

/// Interior product i_ω along a 1-form ω, extended as a degree −1
/// graded-derivation.
pub fn interior_one<S: Scalar>(p: &[Vec<S>], omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
    let n = eta.n;
    let exemplar = match omega.terms.values().next() {
        Some(c) => c.clone(),
        None => return Ok(Form::zero(n)),
    };
    let x = vector_of(p, omega, &exemplar)?;
    let mut out = Form::zero(n);
    for (j, xj) in x.iter().enumerate() {
        if xj.is_zero() {
            continue;
        }
        out = out.add(&eta.contract(j).scalar_mul(xj)?)?;
    }
    Ok(out)
}

/// i_{ω₁⋯ω_m} = i_{ω₁} ∘ ⋯ ∘ i_{ω_m} extended multilinearly over basis
/// terms; a degree-0 factor acts by multiplication.
pub fn interior_multi<S: Scalar>(p: &[Vec<S>], omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
    let n = eta.n;
    let mut out = Form::zero(n);
    for (mask, c) in &omega.terms {
        let mut cur = eta.clone();
        // i_{dx^{i1}} ∘ ⋯ ∘ i_{dx^{im}}: the last factor acts first.
        for a in mask_indices(*mask).into_iter().rev() {
            let one_form = Form::monomial(n, 1 << a, c.one_like());
            cur = interior_one(p, &one_form, &cur)?;
        }
        out = out.add(&cur.scalar_mul(c)?)?;
    }
    Ok(out)
}

/// The degree −2 product (ω₁⋯ω_m) ⊥ (η₁⋯η_n)
/// = Σ_{i,j} (−1)^{i+j} (ω_i, η_j) ω₁⋯ω̂_i⋯ω_m η₁⋯η̂_j⋯η_n.
pub fn perp<S: Scalar>(p: &[Vec<S>], omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
    let n = eta.n;
    let mut out = Form::zero(n);
    for (ma, ca) in &omega.terms {
        let ia = mask_indices(*ma);
        for (mb, cb) in &eta.terms {
            let ib = mask_indices(*mb);
            for (pi, &a) in ia.iter().enumerate() {
                for (qj, &b) in ib.iter().enumerate() {
                    let pr = &p[a][b];
                    if pr.is_zero() {
                        continue;
                    }
                    let ra = ma & !(1u32 << a);
                    let rb = mb & !(1u32 << b);
                    if ra & rb != 0 {
                        continue;
                    }
                    // (−1)^{i+j} with 1-based i, j has the parity of pi+qj;
                    // removing each factor to the front of its word costs
                    // (−1)^{pi} and (−1)^{qj}, which cancel against it, so
                    // only the merge sign of the remainders survives... kept
                    // explicit below for clarity.
                    let mut sign = if (pi + qj) % 2 == 0 { 1 } else { -1 };
                    sign *= merge_sign(ra, rb);
                    let mut coeff = ca.mul(pr)?.mul(cb)?;
                    if sign < 0 {
                        coeff = coeff.neg();
                    }
                    out.add_term(ra | rb, coeff);
                }
            }
        }
    }
    Ok(out)
}

/// Lie derivative along a form, 𝓛_ω η = ω ⊥ dη − (−1)^{|ω|} d(ω ⊥ η),
/// extended to mixed ω by homogeneous parts.
pub fn lie_derivative<S: Scalar>(p: &[Vec<S>], omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
    let mut out = Form::zero(eta.n);
    for (deg, part) in omega.homogeneous_parts() {
        let first = perp(p, &part, &eta.exterior_d()?)?;
        let mut second = perp(p, &part, eta)?.exterior_d()?;
        if deg % 2 == 0 {
            second = second.neg();
        }
        out = out.add(&first.add(&second)?)?;
    }
    Ok(out)
}

/// How the codifferential is realised.
pub enum DeltaKind<S: Scalar> {
    /// δ = Σ_j i_{dx^j} ∇_{∂_j} (the metric divergence).
    Divergence,
    /// The divergence plus the interior product along a fixed vector field
    /// v (components in the coordinate frame): δ + ⌊_v.
    DivergencePlus(Vec<S>),
    /// δ = (−1)^{|ω|+1} ⋆^{-1} d ⋆, needing √det g.
    Hodge,
}

pub struct DeltaHandle<S: Scalar> {
    pub metric: Metric<S>,
    pub chris: Christoffel<S>,
    pub kind: DeltaKind<S>,
}

impl<S: Scalar> DeltaHandle<S> {
    pub fn divergence(metric: Metric<S>) -> Result<Self> {
        let chris = Christoffel::new(&metric)?;
        Ok(DeltaHandle { metric, chris, kind: DeltaKind::Divergence })
    }

    pub fn divergence_plus(metric: Metric<S>, v: Vec<S>) -> Result<Self> {
        if v.len() != metric.n {
            return Err(Error::InvalidMetric("vector field has wrong length".into()));
        }
        let chris = Christoffel::new(&metric)?;
        Ok(DeltaHandle { metric, chris, kind: DeltaKind::DivergencePlus(v) })
    }

    pub fn hodge(metric: Metric<S>) -> Result<Self> {
        // Fail early if the ring cannot take the square root.
        metric.det.sqrt()?;
        let chris = Christoffel::new(&metric)?;
        Ok(DeltaHandle { metric, chris, kind: DeltaKind::Hodge })
    }

    pub fn apply(&self, omega: &Form<S>) -> Result<Form<S>> {
        let m = &self.metric;
        let mut out = Form::zero(m.n);
        match &self.kind {
            DeltaKind::Divergence | DeltaKind::DivergencePlus(_) => {
                for j in 0..m.n {
                    let dxj = m.basis_one_form(j);
                    let nab = self.chris.nabla_coord(j, omega)?;
                    out = out.add(&interior_one(&m.ginv, &dxj, &nab)?)?;
                }
                if let DeltaKind::DivergencePlus(v) = &self.kind {
                    for (i, vi) in v.iter().enumerate() {
                        if vi.is_zero() {
                            continue;
                        }
                        out = out.add(&omega.contract(i).scalar_mul(vi)?)?;
                    }
                }
            }
            DeltaKind::Hodge => {
                for (deg, part) in omega.homogeneous_parts() {
                    if deg == 0 {
                        continue;
                    }
                    let starred = hodge_star(m, &part)?;
                    let d = starred.exterior_d()?;
                    let mut back = hodge_star_inverse(m, &d)?;
                    if deg % 2 == 0 {
                        back = back.neg();
                    }
                    out = out.add(&back)?;
                }
            }
        }
        Ok(out)
    }

    /// The codifferential as a closure, for the generic identity layer.
    pub fn as_fn(&self) -> impl Fn(&Form<S>) -> Result<Form<S>> + '_ {
        move |w| self.apply(w)
    }
}

fn submatrix_det<S: Scalar>(m: &[Vec<S>], rows: &[usize], cols: &[usize], ex: &S) -> Result<S> {
    if rows.is_empty() {
        return Ok(ex.one_like());
    }
    let mut acc = ex.zero_like();
    let r = rows[0];
    let rest: Vec<usize> = rows[1..].to_vec();
    for (pos, &c) in cols.iter().enumerate() {
        let sub_cols: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&x| x != c)
            .collect();
        let minor = submatrix_det(m, &rest, &sub_cols, ex)?;
        let term = m[r][c].mul(&minor)?;
        if pos % 2 == 0 {
            acc = acc.add(&term)?;
        } else {
            acc = acc.sub(&term)?;
        }
    }
    Ok(acc)
}

/// ⋆(dx^I) = √det g · Σ_{|K|=|I|} det(g^{-1}[I,K]) sgn(K, K^c) dx^{K^c},
/// extended linearly over coefficients.
pub fn hodge_star<S: Scalar>(m: &Metric<S>, omega: &Form<S>) -> Result<Form<S>> {
    let n = m.n;
    let sqrt_det = m.det.sqrt()?;
    let full: u32 = (1u32 << n) - 1;
    let mut out = Form::zero(n);
    for (mask, c) in &omega.terms {
        let rows = mask_indices(*mask);
        let k = rows.len();
        for kmask in 0u32..=full {
            if kmask.count_ones() as usize != k {
                continue;
            }
            let cols = mask_indices(kmask);
            let det = submatrix_det(&m.ginv, &rows, &cols, &m.exemplar)?;
            if det.is_zero() {
                continue;
            }
            let comp = full & !kmask;
            let sign = merge_sign(kmask, comp);
            let mut coeff = c.mul(&det)?.mul(&sqrt_det)?;
            if sign < 0 {
                coeff = coeff.neg();
            }
            out.add_term(comp, coeff);
        }
    }
    Ok(out)
}

/// ⋆^{-1} using ⋆⋆ = (−1)^{k(n−k)} on degree-k forms.
pub fn hodge_star_inverse<S: Scalar>(m: &Metric<S>, eta: &Form<S>) -> Result<Form<S>> {
    let n = m.n;
    let mut out = Form::zero(n);
    for (q, part) in eta.homogeneous_parts() {
        let k = n - q;
        let mut s = hodge_star(m, &part)?;
        if (k * (n - k)) % 2 != 0 {
            s = s.neg();
        }
        out = out.add(&s)?;
    }
    Ok(out)
}

/// L_δ(ω, η) = δ(ωη) − (δω)η − (−1)^{|ω|} ω δη.
pub fn l_delta<S: Scalar>(delta: FormMap<S>, omega: &Form<S>, eta: &Form<S>) -> Result<Form<S>> {
    leibnizator(delta, -1, omega, eta)
}

/// Levi-Civita connection reconstructed from the codifferential:
/// ∇_ω η = ½ (L_δ(ω, η) + 𝓛_ω η + (dω) ⊥ η).
pub fn levi_connection<S: Scalar>(
    p: &[Vec<S>],
    delta: FormMap<S>,
    omega: &Form<S>,
    eta: &Form<S>,
) -> Result<Form<S>> {
    let half = BigRational::new(1.into(), 2.into());
    let a = l_delta(delta, omega, eta)?;
    let b = lie_derivative(p, omega, eta)?;
    let c = perp(p, &omega.exterior_d()?, eta)?;
    Ok(a.add(&b)?.add(&c)?.scale(&half))
}

/// Expansion L_δ(ω₁⋯ω_m, η) = Σ_i (−1)^{i−1} ω₁⋯ω̂_i⋯ω_m L_δ(ω_i, η),
/// evaluated term by term on the basis decomposition of ω.
pub fn l_delta_multi_expansion<S: Scalar>(
    delta: FormMap<S>,
    omega: &Form<S>,
    eta: &Form<S>,
) -> Result<Form<S>> {
    let n = eta.n;
    let mut out = Form::zero(n);
    for (mask, c) in &omega.terms {
        for (pos, a) in mask_indices(*mask).into_iter().enumerate() {
            // Write c·dx^mask = (c dx^{a₁}) dx^{a₂} ⋯ dx^{a_m}. L_δ is not
            // tensorial in its first argument, so the coefficient must stay
            // on the factor being extracted when that is the first one.
            let (hat_c, one_c) = if pos == 0 {
                (c.one_like(), c.clone())
            } else {
                (c.clone(), c.one_like())
            };
            let hat = Form::monomial(n, mask & !(1u32 << a), hat_c);
            let one = Form::monomial(n, 1u32 << a, one_c);
            let mut term = hat.wedge(&l_delta(delta, &one, eta)?)?;
            // (−1)^{i−1} against the extraction sign (−1)^{pos} of moving
            // ω_i to the front: pos is already i−1 in 0-based indexing,
            // and the hat product keeps the remaining factors in order.
            if pos % 2 != 0 {
                term = term.neg();
            }
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

/// Torsion functional T(ω, η)(ζ) = (ω, ∇_η ζ) − (η, ∇_ω ζ) − i_ω i_η dζ
/// on 1-forms; identically zero for the reconstructed connection.
pub fn torsion_scalar<S: Scalar>(
    p: &[Vec<S>],
    delta: FormMap<S>,
    omega: &Form<S>,
    eta: &Form<S>,
    zeta: &Form<S>,
    exemplar: &S,
) -> Result<S> {
    let a = pairing_scalar(p, omega, &levi_connection(p, delta, eta, zeta)?, exemplar)?;
    let b = pairing_scalar(p, eta, &levi_connection(p, delta, omega, zeta)?, exemplar)?;
    let c = interior_one(p, omega, &interior_one(p, eta, &zeta.exterior_d()?)?)?;
    Ok(a.sub(&b)?.sub(&c.coeff(0, exemplar))?)
}

/// Metric compatibility C_ω(η, ζ) = (ω, d(η, ζ)) − (∇_ω η, ζ) − (η, ∇_ω ζ)
/// on 1-forms; identically zero for the reconstructed connection.
pub fn metric_compat_scalar<S: Scalar>(
    p: &[Vec<S>],
    delta: FormMap<S>,
    omega: &Form<S>,
    eta: &Form<S>,
    zeta: &Form<S>,
    exemplar: &S,
) -> Result<S> {
    let pair = pairing_scalar(p, eta, zeta, exemplar)?;
    let dpair = Form::scalar(omega.n, pair).exterior_d()?;
    let a = pairing_scalar(p, omega, &dpair, exemplar)?;
    let b = pairing_scalar(p, &levi_connection(p, delta, omega, eta)?, zeta, exemplar)?;
    let c = pairing_scalar(p, eta, &levi_connection(p, delta, omega, zeta)?, exemplar)?;
    Ok(a.sub(&b)?.sub(&c)?)
}

/// Curvature R(ω, η)ζ = ∇_ω ∇_η ζ − ∇_η ∇_ω ζ − ∇_{L_δ(ω,η)} ζ on
/// 1-forms.
pub fn curvature<S: Scalar>(
    p: &[Vec<S>],
    delta: FormMap<S>,
    omega: &Form<S>,
    eta: &Form<S>,
    zeta: &Form<S>,
) -> Result<Form<S>> {
    let a = levi_connection(p, delta, omega, &levi_connection(p, delta, eta, zeta)?)?;
    let b = levi_connection(p, delta, eta, &levi_connection(p, delta, omega, zeta)?)?;
    let bracket = l_delta(delta, omega, eta)?;
    let c = levi_connection(p, delta, &bracket, zeta)?;
    a.sub(&b)?.sub(&c)
}

/// Hodge Laplacian Δ = dδ + δd (sign convention: Δ(x²) = 2 on flat space).
pub fn hodge_laplacian<S: Scalar>(delta: FormMap<S>, omega: &Form<S>) -> Result<Form<S>> {
    delta(&omega.exterior_d()?)?.add(&delta(omega)?.exterior_d()?)
}

/// Laplace-Beltrami operator built from the reconstructed connection:
/// Δ_LB = Σ_{ij} g_ij ∇_{dx^i} ∇_{dx^j} − ∇_ξ with
/// ξ = Σ_{ij} g_ij ∇_{dx^i} dx^j.
pub fn laplace_beltrami<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    omega: &Form<S>,
) -> Result<Form<S>> {
    let n = m.n;
    let p = &m.ginv;
    let mut out = Form::zero(n);
    let mut xi = Form::zero(n);
    for i in 0..n {
        let dxi = m.basis_one_form(i);
        for j in 0..n {
            let gij = &m.g[i][j];
            if gij.is_zero() {
                continue;
            }
            let dxj = m.basis_one_form(j);
            let inner = levi_connection(p, delta, &dxj, omega)?;
            out = out.add(&levi_connection(p, delta, &dxi, &inner)?.scalar_mul(gij)?)?;
            xi = xi.add(&levi_connection(p, delta, &dxi, &dxj)?.scalar_mul(gij)?)?;
        }
    }
    out.sub(&levi_connection(p, delta, &xi, omega)?)
}

/// Weitzenbock curvature operator W = Δ_LB − Δ.
pub fn weitzenbock<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    omega: &Form<S>,
) -> Result<Form<S>> {
    laplace_beltrami(m, delta, omega)?.sub(&hodge_laplacian(delta, omega)?)
}

/// Extend a degree-0 operator B on 1-forms to Ω¹ ⊗ Ω¹ by the second-order
/// Leibniz rule B(ω ⊗ η) = Bω ⊗ η + ω ⊗ Bη + 2 Σ_{ab} g_ab ∇_{dx^a} ω ⊗
/// ∇_{dx^b} η, after checking L_B(a, ω) = 2 ∇_{da} ω on samples.
pub fn extend_to_tensor<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    b: FormMap<S>,
    t: &TensorForm<S>,
) -> Result<TensorForm<S>> {
    check_second_order_leibniz(m, delta, b)?;
    let n = m.n;
    let p = &m.ginv;
    let two = BigRational::from_integer(2.into());
    let mut pairs: Vec<(Form<S>, Form<S>)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let tij = &t.entries[i][j];
            if tij.is_zero() {
                continue;
            }
            let wi = m.basis_one_form(i).scalar_mul(tij)?;
            let wj = m.basis_one_form(j);
            pairs.push((b(&wi)?, wj.clone()));
            pairs.push((wi.clone(), b(&wj)?));
            for a in 0..n {
                for bb in 0..n {
                    let gab = &m.g[a][bb];
                    if gab.is_zero() {
                        continue;
                    }
                    let na = levi_connection(p, delta, &m.basis_one_form(a), &wi)?;
                    let nb = levi_connection(p, delta, &m.basis_one_form(bb), &wj)?;
                    pairs.push((na.scalar_mul(gab)?.scale(&two), nb));
                }
            }
        }
    }
    TensorForm::from_pairs(n, &pairs, &m.exemplar)
}

/// Verifies that B is second order in the connection sense:
/// L_B(a, ω) = 2 ∇_{da} ω for sampled functions a and 1-forms ω.
fn check_second_order_leibniz<S: Scalar>(
    m: &Metric<S>,
    delta: FormMap<S>,
    b: FormMap<S>,
) -> Result<()> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let n = m.n;
    let p = &m.ginv;
    let two = BigRational::from_integer(2.into());
    for _ in 0..4 {
        let a = crate::forms::random_scalar(&mut rng, n, &m.exemplar);
        let w = crate::forms::random_form(&mut rng, n, 1, &m.exemplar);
        let af = Form::scalar(n, a);
        let lhs = leibnizator(b, 0, &af, &w)?;
        let rhs = levi_connection(p, delta, &af.exterior_d()?, &w)?.scale(&two);
        if lhs.sub(&rhs)?.residual_norm() > 1e-24 {
            return Err(Error::LeibnizatorMismatch(
                "operator is not second order with respect to the connection".into(),
            ));
        }
    }
    Ok(())
}

/// Ricci tensor from the codifferential alone: Ricci = −½ (extension of
/// Δ = dδ + δd to Ω¹ ⊗ Ω¹) applied to the metric.
pub fn ricci_via_delta<S: Scalar>(m: &Metric<S>, delta: FormMap<S>) -> Result<TensorForm<S>> {
    let lap = |w: &Form<S>| hodge_laplacian(delta, w);
    let half = BigRational::new(1.into(), 2.into());
    Ok(extend_to_tensor(m, delta, &lap, &m.metric_tensor())?
        .scale(&half)
        .scale(&BigRational::from_integer((-1).into())))
}

/// Data recovered by Θ from a codifferential alone: the symmetric pairing
/// matrix (dx^i, dx^j).
#[derive(Debug, Clone)]
pub struct ThetaData<S: Scalar> {
    pub pairing: Vec<Vec<S>>,
}

/// Θ: recover the pairing from δ via
/// (dx^i, dx^j) = δ(x_i dx^j) − x_i δ(dx^j)
/// and check regularity: δ(aω) − a δω must equal i_{da} ω for sampled a, ω
/// and the recovered pairing must be symmetric.
pub fn theta_map<S: Scalar>(n: usize, exemplar: &S, delta: FormMap<S>) -> Result<ThetaData<S>> {
    use rand::SeedableRng;
    let mut pairing = vec![vec![exemplar.zero_like(); n]; n];
    for i in 0..n {
        let xi = exemplar.from_poly(&MultiPoly::var(n, i));
        for j in 0..n {
            let dxj = Form::basis_one_form(n, j, exemplar);
            let a = delta(&dxj.scalar_mul(&xi)?)?;
            let b = delta(&dxj)?.scalar_mul(&xi)?;
            pairing[i][j] = a.sub(&b)?.coeff(0, exemplar);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !pairing[i][j].sub(&pairing[j][i])?.is_zero() {
                return Err(Error::NotRegular("recovered pairing is not symmetric".into()));
            }
        }
    }
    if invert_matrix(&pairing).is_err() {
        return Err(Error::NotRegular("recovered pairing is degenerate".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7e7a);
    for _ in 0..6 {
        let a = crate::forms::random_scalar(&mut rng, n, exemplar);
        for deg in 1..=2.min(n) {
            let w = crate::forms::random_form(&mut rng, n, deg, exemplar);
            let af = Form::scalar(n, a.clone());
            let da = af.exterior_d()?;
            let lhs = delta(&w.scalar_mul(&a)?)?.sub(&delta(&w)?.scalar_mul(&a)?)?;
            let rhs = interior_one(&pairing, &da, &w)?;
            if lhs.sub(&rhs)?.residual_norm() > 1e-24 {
                return Err(Error::NotRegular(
                    "δ(aω) − a δω does not agree with i_{da}ω".into(),
                ));
            }
        }
    }
    Ok(ThetaData { pairing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{random_form, random_scalar};
    use crate::scalar::{Jet, RationalFn};
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

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

    fn diagpoly_metric() -> Metric<RationalFn> {
        // diag(1 + x², 1 + y²)
        let x = RationalFn::var(2, 0);
        let y = RationalFn::var(2, 1);
        let one = RationalFn::from_int(2, 1);
        let zero = RationalFn::from_int(2, 0);
        let g = vec![
            vec![one.add(&x.mul(&x).unwrap()).unwrap(), zero.clone()],
            vec![zero, one.add(&y.mul(&y).unwrap()).unwrap()],
        ];
        Metric::new(g).unwrap()
    }

    /// Round 2-sphere, g = diag(1, sin²θ), as a jet at θ=1, φ=1.
    fn sphere_metric(order: u32) -> Metric<Jet> {
        let base = vec![q(1, 1), q(1, 1)];
        let theta = Jet::var(base.clone(), order, 0);
        let s = theta.sin();
        let one = Jet::constant(base.clone(), order, q(1, 1));
        let zero = Jet::zero(base, order);
        let g = vec![vec![one, zero.clone()], vec![zero, s.mul(&s).unwrap()]];
        Metric::new(g).unwrap()
    }

    #[test]
    fn inverse_and_det_diagpoly() {
        let m = diagpoly_metric();
        let x = RationalFn::var(2, 0);
        let one = RationalFn::from_int(2, 1);
        let expect = one.add(&x.mul(&x).unwrap()).unwrap().inverse().unwrap();
        assert_eq!(m.ginv[0][0], expect);
        assert!(m.ginv[0][1].is_zero());
        let y = RationalFn::var(2, 1);
        let det = one
            .add(&x.mul(&x).unwrap())
            .unwrap()
            .mul(&one.add(&y.mul(&y).unwrap()).unwrap())
            .unwrap();
        assert_eq!(m.det, det);
    }

    #[test]
    fn sphere_christoffel_values() {
        let m = sphere_metric(4);
        let ch = Christoffel::new(&m).unwrap();
        // Γ^θ_{φφ} = −sinθ cosθ, Γ^φ_{θφ} = cotθ
        let base = vec![q(1, 1), q(1, 1)];
        let theta = Jet::var(base, 4, 0);
        let expect_tpp = theta.sin().mul(&theta.cos()).unwrap().neg();
        assert_eq!(ch.gamma[0][1][1], expect_tpp);
        let cot = theta.cos().mul(&theta.sin().inverse().unwrap()).unwrap();
        assert_eq!(ch.gamma[1][0][1], cot);
        assert!(ch.gamma[0][0][0].is_zero());
    }

    #[test]
    fn levi_matches_oracle_on_sphere() {
        let m = sphere_metric(4);
        let ch = Christoffel::new(&m).unwrap();
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        for i in 0..2 {
            for j in 0..2 {
                let w = m.basis_one_form(i);
                let e = m.basis_one_form(j);
                let rec = levi_connection(&m.ginv, &delta, &w, &e).unwrap();
                let oracle = ch.nabla_form(&m, &w, &e).unwrap();
                assert!(
                    rec.sub(&oracle).unwrap().residual_norm() < 1e-24,
                    "mismatch at ({i},{j})"
                );
            }
        }
        // ∇_{dθ} dφ = −cotθ dφ
        let rec = levi_connection(&m.ginv, &delta, &m.basis_one_form(0), &m.basis_one_form(1))
            .unwrap();
        let base = vec![q(1, 1), q(1, 1)];
        let theta = Jet::var(base, 4, 0);
        let cot = theta.cos().mul(&theta.sin().inverse().unwrap()).unwrap();
        let expect = m.basis_one_form(1).scalar_mul(&cot.neg()).unwrap();
        assert!(rec.sub(&expect).unwrap().residual_norm() < 1e-24);
    }

    #[test]
    fn levi_matches_oracle_random_diagpoly() {
        let m = diagpoly_metric();
        let ch = Christoffel::new(&m).unwrap();
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let w = random_form(&mut rng, 2, 1, &m.exemplar);
            let e = random_form(&mut rng, 2, 1, &m.exemplar);
            let rec = levi_connection(&m.ginv, &delta, &w, &e).unwrap();
            let oracle = ch.nabla_form(&m, &w, &e).unwrap();
            assert_eq!(rec, oracle);
        }
    }

    #[test]
    fn torsion_and_compat_vanish() {
        let m = diagpoly_metric();
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let w = random_form(&mut rng, 2, 1, &m.exemplar);
            let e = random_form(&mut rng, 2, 1, &m.exemplar);
            let z = random_form(&mut rng, 2, 1, &m.exemplar);
            let t = torsion_scalar(&m.ginv, &delta, &w, &e, &z, &m.exemplar).unwrap();
            assert!(t.is_zero(), "torsion nonzero");
            let c = metric_compat_scalar(&m.ginv, &delta, &w, &e, &z, &m.exemplar).unwrap();
            assert!(c.is_zero(), "compat nonzero");
        }
    }

    #[test]
    fn hodge_star_flat_examples() {
        let m = flat_metric(2);
        let dx = m.basis_one_form(0);
        let dy = m.basis_one_form(1);
        assert_eq!(hodge_star(&m, &dx).unwrap(), dy);
        assert_eq!(hodge_star(&m, &dy).unwrap(), dx.neg());
        let one = Form::scalar(2, m.exemplar.clone());
        let vol = dx.wedge(&dy).unwrap();
        assert_eq!(hodge_star(&m, &one).unwrap(), vol);
        assert_eq!(hodge_star(&m, &vol).unwrap(), one);
        // ⋆⋆ = (−1)^{k(n−k)}
        let ss = hodge_star(&m, &hodge_star(&m, &dx).unwrap()).unwrap();
        assert_eq!(ss, dx.neg());
        assert_eq!(hodge_star_inverse(&m, &hodge_star(&m, &dx).unwrap()).unwrap(), dx);
    }

    #[test]
    fn hodge_delta_equals_divergence_delta() {
        // On the sphere jets both realisations of δ agree.
        let m = sphere_metric(4);
        let div = DeltaHandle::divergence(m.clone()).unwrap();
        let hod = DeltaHandle::hodge(m.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for deg in 1..=2usize {
            for _ in 0..6 {
                let w = random_form(&mut rng, 2, deg, &m.exemplar);
                let a = div.apply(&w).unwrap();
                let b = hod.apply(&w).unwrap();
                assert!(
                    a.sub(&b).unwrap().residual_norm() < 1e-24,
                    "δ mismatch at degree {deg}"
                );
            }
        }
    }

    #[test]
    fn laplacian_sign_convention() {
        // Δ(x²) = 2 on flat space, for both Δ and Δ_LB on functions.
        let m = flat_metric(2);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let x = m.coordinate(0);
        let x2 = Form::scalar(2, x.mul(&x).unwrap());
        let lap = hodge_laplacian(&delta, &x2).unwrap();
        let two = Form::scalar(2, m.exemplar.scale(&q(2, 1)));
        assert_eq!(lap, two);
    }

    #[test]
    fn weitzenbock_on_sphere() {
        // W(dθ) = dθ on the unit sphere (Ricci = g, so W = Ric♯ = id on
        // 1-forms).
        let m = sphere_metric(4);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let dtheta = m.basis_one_form(0);
        let w = weitzenbock(&m, &delta, &dtheta).unwrap();
        assert!(w.sub(&dtheta).unwrap().residual_norm() < 1e-24);
        let dphi = m.basis_one_form(1);
        let w2 = weitzenbock(&m, &delta, &dphi).unwrap();
        assert!(w2.sub(&dphi).unwrap().residual_norm() < 1e-24);
    }

    #[test]
    fn ricci_flat_and_sphere() {
        let m = flat_metric(3);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let ric = ricci_via_delta(&m, &delta).unwrap();
        assert!(ric.is_zero());

        let m = sphere_metric(4);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let ric = ricci_via_delta(&m, &delta).unwrap();
        let ch = Christoffel::new(&m).unwrap();
        let oracle = ch.ricci_matrix(&m.exemplar).unwrap();
        let diff = ric
            .sub(&TensorForm { n: 2, entries: oracle })
            .unwrap();
        assert!(diff.residual_norm() < 1e-24, "Ricci disagrees with oracle");
        // and Ricci = g for the unit sphere
        let diff = ric.sub(&m.metric_tensor()).unwrap();
        assert!(diff.residual_norm() < 1e-24, "Ricci is not g on the unit sphere");
    }

    #[test]
    fn l_delta_multi_expansion_matches() {
        let m = diagpoly_metric();
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for deg in 1..=2usize {
            for _ in 0..8 {
                let w = random_form(&mut rng, 2, deg, &m.exemplar);
                let e = {
                    let d = rng.gen_range(0..=2);
                    random_form(&mut rng, 2, d, &m.exemplar)
                };
                let direct = l_delta(&delta, &w, &e).unwrap();
                let expanded = l_delta_multi_expansion(&delta, &w, &e).unwrap();
                assert_eq!(direct, expanded);
            }
        }
    }

    #[test]
    fn theta_fiber_invariance() {
        // Θ(δ + ⌊_v) = Θ(δ): adding an interior product along any vector
        // field leaves the recovered pairing unchanged.
        let m = diagpoly_metric();
        let base = DeltaHandle::divergence(m.clone()).unwrap();
        let theta0 = theta_map(2, &m.exemplar, &base.as_fn()).unwrap();
        for (i, row) in theta0.pairing.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                assert_eq!(entry, &m.ginv[i][j]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..3 {
            let v = vec![
                random_scalar(&mut rng, 2, &m.exemplar),
                random_scalar(&mut rng, 2, &m.exemplar),
            ];
            let shifted = DeltaHandle::divergence_plus(m.clone(), v).unwrap();
            let theta1 = theta_map(2, &m.exemplar, &shifted.as_fn()).unwrap();
            assert_eq!(theta0.pairing, theta1.pairing);
        }
    }

    #[test]
    fn theta_rejects_irregular_delta() {
        // A degree −1 map that is not of the required form must be refused.
        let m = flat_metric(2);
        let bogus = |w: &Form<RationalFn>| -> Result<Form<RationalFn>> {
            let x = RationalFn::var(2, 0);
            w.contract(0).scalar_mul(&x.mul(&x)?)
        };
        assert!(matches!(
            theta_map(2, &m.exemplar, &bogus),
            Err(Error::NotRegular(_))
        ));
    }

    #[test]
    fn curvature_flat_vanishes_sphere_not() {
        let m = flat_metric(2);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..5 {
            let w = random_form(&mut rng, 2, 1, &m.exemplar);
            let e = random_form(&mut rng, 2, 1, &m.exemplar);
            let z = random_form(&mut rng, 2, 1, &m.exemplar);
            assert!(curvature(&m.ginv, &delta, &w, &e, &z).unwrap().is_zero());
        }
        let m = sphere_metric(4);
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let r = curvature(
            &m.ginv,
            &delta,
            &m.basis_one_form(0),
            &m.basis_one_form(1),
            &m.basis_one_form(1),
        )
        .unwrap();
        assert!(r.residual_norm() > 1e-6, "sphere curvature should not vanish");
    }

    #[test]
    fn interior_and_perp_basics() {
        let m = flat_metric(2);
        let p = &m.ginv;
        let dx = m.basis_one_form(0);
        let dy = m.basis_one_form(1);
        let dxdy = dx.wedge(&dy).unwrap();
        // i_{dx}(dx∧dy) = dy
        assert_eq!(interior_one(p, &dx, &dxdy).unwrap(), dy);
        // dx∧dy ⊥ dx∧dy: (ω₁ω₂)⊥ = ω₂ i_{ω₁} − ω₁ i_{ω₂}
        let lhs = perp(p, &dxdy, &dxdy).unwrap();
        let rhs = dy
            .wedge(&interior_one(p, &dx, &dxdy).unwrap())
            .unwrap()
            .sub(&dx.wedge(&interior_one(p, &dy, &dxdy).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        // i_{dx∧dy} over a 2-form is a scalar
        let i2 = interior_multi(p, &dxdy, &dxdy).unwrap();
        assert_eq!(i2.degree(), Some(0));
    }

    #[test]
    fn perp_matches_two_sided_interior_formula() {
        // ω₁ω₂ ⊥ η = (ω₂ i_{ω₁} − ω₁ i_{ω₂}) η for decomposable 2-forms.
        let m = diagpoly_metric();
        let p = &m.ginv;
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..10 {
            let w1 = random_form(&mut rng, 2, 1, &m.exemplar);
            let w2 = random_form(&mut rng, 2, 1, &m.exemplar);
            let deg = rng.gen_range(0..=2);
            let e = random_form(&mut rng, 2, deg, &m.exemplar);
            let lhs = perp(p, &w1.wedge(&w2).unwrap(), &e).unwrap();
            let rhs = w2
                .wedge(&interior_one(p, &w1, &e).unwrap())
                .unwrap()
                .sub(&w1.wedge(&interior_one(p, &w2, &e).unwrap()).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

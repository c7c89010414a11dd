//! Decompositions of linear relations: the intersection operator `T₀`, the
//! Lebesgue decomposition `T = PT + (I−P)T` with `P` projecting onto
//! `dom T*`, the weak Lebesgue decomposition `T = QT + (I−Q)T` with `Q`
//! projecting onto `(mul T)⊥`, the decomposability equivalences, compressed
//! projections `F · P_{M,N}`, and continuity diagnostics built on the
//! Friedrichs cosine.
//!
//! Every finite-dimensional relation is closed and therefore decomposable;
//! the reports still evaluate each hypothesis separately so the logic of the
//! general theory stays visible, and a disagreement between routes signals a
//! rank-tolerance bug rather than genuine mathematics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::projection::MvProjection;
use crate::relation::LinearRelation;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// How a decomposition splits its relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    /// `original = operator_term +̂ residual_term` with residual `{0} × mul`.
    Componentwise,
    /// `original = operator_term + residual_term` with orthogonal ranges.
    RangeOrthogonal,
}

/// A two-term decomposition with an operator part.
#[derive(Debug, Clone)]
pub struct Decomposition<S: Scalar> {
    pub original: LinearRelation<S>,
    pub operator_term: LinearRelation<S>,
    pub residual_term: LinearRelation<S>,
    pub kind: DecompositionKind,
}

/// `T₀ = T ∩ (dom T × dom T*)`, the intersection operator. The second factor
/// is read off the computed adjoint, not from the `(mul T)⊥` shortcut, so
/// the equality `T₀ = T_m` stays a genuine cross-check.
pub fn t0<S: Scalar>(t: &LinearRelation<S>) -> Result<LinearRelation<S>> {
    let dom = t.dom();
    let dom_star = t.adjoint().dom();
    let restricted = t.restrict(&dom)?;
    Ok(restricted.inverse().restrict(&dom_star)?.inverse())
}

/// Lebesgue decomposition `T = T_reg + T_sing` with `T_reg = PT`,
/// `T_sing = (I−P)T` and `P = P_{dom T*}`. Verifies that the ranges are
/// orthogonal, that `T_reg` is an operator, that the terms sum back to `T`,
/// and that `T_sing` equals the full product `dom T × mul T`.
pub fn lebesgue<S: Scalar>(t: &LinearRelation<S>) -> Result<Decomposition<S>> {
    let p = t.adjoint().dom().projector();
    decompose_by_projector(t, &p, "lebesgue")
}

/// Weak Lebesgue decomposition `T = T_m + (I−Q)T` with `Q = P_{(mul T)⊥}`.
pub fn weak_lebesgue<S: Scalar>(t: &LinearRelation<S>) -> Result<Decomposition<S>> {
    let q = t.mul_part().complement().projector();
    decompose_by_projector(t, &q, "weak lebesgue")
}

fn decompose_by_projector<S: Scalar>(
    t: &LinearRelation<S>,
    p: &DMatrix<S>,
    label: &str,
) -> Result<Decomposition<S>> {
    let tol = t.tol();
    let dim = t.dim_out();
    let operator_term = LinearRelation::graph_of(p, tol).compose(t)?;
    let complement_proj = DMatrix::<S>::identity(dim, dim) - p;
    let residual_term = LinearRelation::graph_of(&complement_proj, tol).compose(t)?;

    if !operator_term.is_operator() {
        return Err(Error::Inconsistent(format!("{label}: operator term is multivalued")));
    }
    let recombined = operator_term.op_sum(&residual_term)?;
    if !recombined.rel_eq(t) {
        return Err(Error::Inconsistent(format!("{label}: terms do not sum back")));
    }
    let cross = operator_term.ran().basis().adjoint() * residual_term.ran().basis();
    if linalg::spectral_norm(&cross) > tol {
        return Err(Error::Inconsistent(format!("{label}: ranges are not orthogonal")));
    }
    Ok(Decomposition {
        original: t.clone(),
        operator_term,
        residual_term,
        kind: DecompositionKind::RangeOrthogonal,
    })
}

/// The four equivalent decomposability conditions, evaluated independently.
#[derive(Debug, Clone)]
pub struct DecomposabilityReport {
    pub decomposable: bool,
    /// `dom T₀ = dom T`.
    pub t0_has_full_domain: bool,
    /// `ran T_sing ⊆ mul T`.
    pub singular_range_in_mul: bool,
    /// `T₀ = T_reg`.
    pub t0_equals_regular_part: bool,
    /// `T₀ = T_m`.
    pub t0_equals_weak_part: bool,
    /// `mul T̄ = mul T` (closures are identities here).
    pub mul_closure_consistent: bool,
}

/// Evaluate all four conditions of the decomposability theorem and insist
/// they agree; in finite dimensions every relation is closed, hence
/// decomposable, so disagreement means the numerics broke.
pub fn is_decomposable<S: Scalar>(t: &LinearRelation<S>) -> Result<DecomposabilityReport> {
    let t0_rel = t0(t)?;
    let leb = lebesgue(t)?;
    let weak = weak_lebesgue(t)?;

    let c1 = t0_rel.dom().equals(&t.dom());
    let c2 = t.mul_part().contains(&leb.residual_term.ran());
    let c3 = t0_rel.rel_eq(&leb.operator_term);
    let c4 = t0_rel.rel_eq(&weak.operator_term);
    if c1 != c2 || c2 != c3 || c3 != c4 {
        return Err(Error::Inconsistent(format!(
            "decomposability conditions disagree: ({c1}, {c2}, {c3}, {c4})"
        )));
    }
    let mul_closure_consistent = t.closure().mul_part().equals(&t.mul_part());
    Ok(DecomposabilityReport {
        decomposable: c1,
        t0_has_full_domain: c1,
        singular_range_in_mul: c2,
        t0_equals_regular_part: c3,
        t0_equals_weak_part: c4,
        mul_closure_consistent,
    })
}

/// Componentwise decomposition of a multivalued projection:
/// `P_{M,N} = P_{M⊖(M∩N) // N} ⊕̂ ({0} × M∩N)`.
pub fn decompose_mv<S: Scalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<Decomposition<S>> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dim("decompose_mv: ambient spaces differ"));
    }
    let overlap = m.intersect(n)?;
    let reduced = m.minus(&overlap)?;
    let operator_term = MvProjection::new(&reduced, n)?.into_relation();
    if !operator_term.is_operator() {
        return Err(Error::Inconsistent("P_{M⊖(M∩N) // N} is multivalued".into()));
    }
    let residual_term =
        LinearRelation::product_of(&Subspace::zero(m.ambient_dim(), m.tol()), &overlap)?;
    let sum = operator_term.cw_sum(&residual_term)?;
    let original = MvProjection::new(m, n)?.into_relation();
    if !sum.relation.rel_eq(&original) {
        return Err(Error::Inconsistent("componentwise terms do not reproduce P_{M,N}".into()));
    }
    if !sum.orthogonal {
        return Err(Error::Inconsistent("componentwise sum is not orthogonal".into()));
    }
    Ok(Decomposition {
        original,
        operator_term,
        residual_term,
        kind: DecompositionKind::Componentwise,
    })
}

/// The subspace-level decomposability conditions for a pair `(M, N)`,
/// with each side exposed for inspection.
#[derive(Debug, Clone)]
pub struct MvConditionsReport<S: Scalar> {
    /// `M + N = (M ∩ (M⊥+N⊥)) ∔ N` (equality and directness).
    pub splitting_of_domain: bool,
    /// `P_{M∩N}(M) = M ∩ N`.
    pub projected_overlap: bool,
    /// `M = (M ∩ (M⊥+N⊥)) ⊕ (M∩N)`.
    pub orthogonal_splitting_of_range: bool,
    pub reduced_range: Subspace<S>,
    pub overlap: Subspace<S>,
}

/// Evaluate the decomposability conditions for `P_{M,N}`; with closed
/// subspaces all three hold.
pub fn decomposability_conditions_mv<S: Scalar>(
    m: &Subspace<S>,
    n: &Subspace<S>,
) -> Result<MvConditionsReport<S>> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dim("conditions_mv: ambient spaces differ"));
    }
    let overlap = m.intersect(n)?;
    let perp_sum = m.complement().sum(&n.complement())?;
    let reduced = m.intersect(&perp_sum)?;

    let together = reduced.sum(n)?;
    let splitting_of_domain = together.equals(&m.sum(n)?)
        && reduced.intersect(n)?.is_zero()
        && together.dim() == reduced.dim() + n.dim();

    let projected_image = m.image_under(&overlap.projector())?;
    let projected_overlap = projected_image.equals(&overlap);

    let cross = reduced.basis().adjoint() * overlap.basis();
    let orthogonal_splitting_of_range = reduced.sum(&overlap)?.equals(m)
        && linalg::spectral_norm(&cross) <= m.tol().max(n.tol())
        && reduced.dim() + overlap.dim() == m.dim();

    Ok(MvConditionsReport {
        splitting_of_domain,
        projected_overlap,
        orthogonal_splitting_of_range,
        reduced_range: reduced,
        overlap,
    })
}

/// Report of compressing `P_{M,N}` by an orthogonal projector `F`.
#[derive(Debug, Clone)]
pub struct CompressReport<S: Scalar> {
    /// `M ∩ N ⊆ ker F`.
    pub overlap_in_kernel: bool,
    /// `M + N = F(M) + (M ∩ ker F) + N`.
    pub domain_splits: bool,
    /// `F(M) ⊆ M + (N ∩ ker F)`.
    pub image_contained: bool,
    /// Whether `F · P_{M,N}` really is a projection (single-valued and
    /// idempotent); always equal to the conjunction of the three conditions.
    pub is_projection: bool,
    /// `F P_{M,N} = P_{F(M) // N + M∩ker F}` when it is a projection.
    pub relation: Option<LinearRelation<S>>,
    /// Witness data when it is not: the operator and idempotency flags.
    pub witness_is_operator: bool,
    pub witness_is_idempotent: bool,
}

/// Compress a multivalued projection by an orthogonal projector `F` and
/// decide whether `F P_{M,N}` is a projection, verifying the predicted
/// range/kernel when it is.
pub fn compress<S: Scalar>(
    f: &DMatrix<S>,
    m: &Subspace<S>,
    n: &Subspace<S>,
) -> Result<CompressReport<S>> {
    let dim = m.ambient_dim();
    if n.ambient_dim() != dim || f.nrows() != dim || f.ncols() != dim {
        return Err(Error::dim("compress: dimensions differ"));
    }
    let tol = m.tol().max(n.tol());
    let scale = linalg::spectral_norm(f).max(1.0);
    if linalg::op_distance(&(f * f), f) > tol * scale || linalg::op_distance(&f.adjoint(), f) > tol * scale
    {
        return Err(Error::pre("F is not an orthogonal projector"));
    }

    let ran_f = Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(f, 0.5), tol);
    let ker_f = ran_f.complement();
    let overlap = m.intersect(n)?;
    let f_of_m = m.image_under(f)?;

    let overlap_in_kernel = ker_f.contains(&overlap);
    let m_cap_kerf = m.intersect(&ker_f)?;
    let domain_splits = f_of_m.sum(&m_cap_kerf)?.sum(n)?.equals(&m.sum(n)?);
    let image_contained = m.sum(&n.intersect(&ker_f)?)?.contains(&f_of_m);

    let compressed = LinearRelation::graph_of(f, tol).compose(MvProjection::new(m, n)?.relation())?;
    let witness_is_operator = compressed.is_operator();
    let witness_is_idempotent = compressed.compose(&compressed)?.rel_eq(&compressed);
    let is_projection = witness_is_operator && witness_is_idempotent;

    let predicted = overlap_in_kernel && domain_splits && image_contained;
    if predicted != is_projection {
        return Err(Error::Inconsistent(format!(
            "compression criterion ({overlap_in_kernel}, {domain_splits}, {image_contained}) \
             disagrees with observed projection status {is_projection}"
        )));
    }

    let relation = if is_projection {
        let target = MvProjection::new(&f_of_m, &n.sum(&m_cap_kerf)?)?.into_relation();
        if !compressed.rel_eq(&target) {
            return Err(Error::Inconsistent(
                "F P_{M,N} differs from P_{F(M) // N + M∩ker F}".into(),
            ));
        }
        Some(compressed)
    } else {
        None
    };

    Ok(CompressReport {
        overlap_in_kernel,
        domain_splits,
        image_contained,
        is_projection,
        relation,
        witness_is_operator,
        witness_is_idempotent,
    })
}

/// Continuity diagnostics for `P_{M,N}`.
#[derive(Debug, Clone, Copy)]
pub struct ContinuityReport {
    /// Friedrichs cosine `c(M, N)`, always `< 1` in finite dimensions.
    pub cosine: f64,
    /// Norm of the weak Lebesgue operator part of `P_{M,N}`.
    pub op_norm: f64,
    /// `M⊥ + N⊥ = (M ∩ N)⊥`, the continuity criterion; closed subspaces
    /// always satisfy it.
    pub criterion_ok: bool,
}

pub fn continuity_report<S: Scalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<ContinuityReport> {
    let cosine = m.friedrichs_cosine(n)?;
    let rel = MvProjection::new(m, n)?.into_relation();
    let (_, op_norm) = rel.operator_part_matrix();
    let criterion_ok = m
        .complement()
        .sum(&n.complement())?
        .equals(&m.intersect(n)?.complement());
    Ok(ContinuityReport { cosine, op_norm, criterion_ok })
}

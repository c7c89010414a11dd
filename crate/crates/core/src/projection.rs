//! Multivalued projections `P_{M,N} = I_M +̂ (N × {0})` and nilpotents:
//! construction, classification of square relations, and the Greville and
//! Pták formulas expressed in the relation calculus.
//!
//! `P_{M,N}` is the multivalued projection with range `M` and kernel `N`;
//! it has `dom = M + N` and `mul = M ∩ N`, is idempotent, and every
//! multivalued projection arises this way from its own range and kernel.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::relation::LinearRelation;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// A multivalued projection, carrying its defining range and kernel next to
/// the relation `I_M +̂ (N × {0})`.
#[derive(Debug, Clone)]
pub struct MvProjection<S: Scalar> {
    range: Subspace<S>,
    kernel: Subspace<S>,
    rel: LinearRelation<S>,
}

impl<S: Scalar> MvProjection<S> {
    /// Build `P_{M,N}` on a common ambient space.
    pub fn new(m: &Subspace<S>, n: &Subspace<S>) -> Result<Self> {
        if m.ambient_dim() != n.ambient_dim() {
            return Err(Error::dim(format!(
                "range lives in dim {}, kernel in dim {}",
                m.ambient_dim(),
                n.ambient_dim()
            )));
        }
        let rel = LinearRelation::identity_on(m)
            .cw_sum(&LinearRelation::zero_on(n))?
            .relation;
        Ok(MvProjection { range: m.clone(), kernel: n.clone(), rel })
    }

    pub fn range(&self) -> &Subspace<S> {
        &self.range
    }

    pub fn kernel(&self) -> &Subspace<S> {
        &self.kernel
    }

    pub fn relation(&self) -> &LinearRelation<S> {
        &self.rel
    }

    pub fn into_relation(self) -> LinearRelation<S> {
        self.rel
    }

    pub fn ambient_dim(&self) -> usize {
        self.range.ambient_dim()
    }

    /// Adjoint law `P*_{M,N} = P_{N⊥,M⊥}` evaluated on the stored pair.
    pub fn adjoint(&self) -> Result<Self> {
        MvProjection::new(&self.kernel.complement(), &self.range.complement())
    }
}

/// Classification verdict for a square relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationClass {
    MvProjection,
    MvNilpotent,
    IdempotentOnly,
    None,
}

impl std::fmt::Display for RelationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RelationClass::MvProjection => "mv_projection",
            RelationClass::MvNilpotent => "mv_nilpotent",
            RelationClass::IdempotentOnly => "idempotent_only",
            RelationClass::None => "none",
        };
        write!(f, "{name}")
    }
}

/// Certificates behind a classification: each tested containment together
/// with its numerical residual (the sine of the worst violated angle).
#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub class: RelationClass,
    pub is_idempotent: bool,
    pub ran_in_dom: bool,
    pub ran_in_dom_residual: f64,
    pub identity_in_graph: bool,
    pub identity_in_graph_residual: f64,
    pub ran_in_ker: bool,
    pub ran_in_ker_residual: f64,
}

fn containment_residual<S: Scalar>(inner: &Subspace<S>, outer: &Subspace<S>) -> f64 {
    if inner.dim() == 0 {
        return 0.0;
    }
    let residual = inner.basis() - outer.projector() * inner.basis();
    linalg::spectral_norm(&residual)
}

/// Decide whether a square relation is a multivalued projection
/// (`I_{ran T} ⊆ T`), a multivalued nilpotent (`ran T ⊆ ker T`), merely
/// idempotent, or none of these. Projections take precedence when both
/// descriptions apply (the zero operator is the standard example).
pub fn classify<S: Scalar>(t: &LinearRelation<S>) -> Result<ClassifyReport> {
    if !t.is_square() {
        return Err(Error::pre("classification needs a square relation"));
    }
    let tol = t.tol();
    let parts = t.parts();
    let t2 = t.compose(t)?;
    let is_idempotent = t2.rel_eq(t);

    let ran_in_dom_residual = containment_residual(&parts.ran, &parts.dom);
    let ran_in_dom = ran_in_dom_residual <= tol;
    let identity_rel = LinearRelation::identity_on(&parts.ran);
    let identity_in_graph_residual = containment_residual(identity_rel.graph(), t.graph());
    let identity_in_graph = identity_in_graph_residual <= tol;
    let ran_in_ker_residual = containment_residual(&parts.ran, &parts.ker);
    let ran_in_ker = ran_in_ker_residual <= tol;

    let class = if identity_in_graph {
        RelationClass::MvProjection
    } else if ran_in_ker {
        RelationClass::MvNilpotent
    } else if is_idempotent {
        RelationClass::IdempotentOnly
    } else {
        RelationClass::None
    };
    Ok(ClassifyReport {
        class,
        is_idempotent,
        ran_in_dom,
        ran_in_dom_residual,
        identity_in_graph,
        identity_in_graph_residual,
        ran_in_ker,
        ran_in_ker_residual,
    })
}

/// Greville's formula as a relation identity:
/// `P_{M,N} = P_M ((I − P_N) P_M)⁻¹ (I − P_N)`.
pub fn greville<S: Scalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<LinearRelation<S>> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dim("greville: ambient spaces differ"));
    }
    let tol = m.tol().max(n.tol());
    let dim = m.ambient_dim();
    let p_m = LinearRelation::graph_of(&m.projector(), tol);
    let i_minus_pn = DMatrix::<S>::identity(dim, dim) - n.projector();
    let middle = LinearRelation::graph_of(&(&i_minus_pn * m.projector()), tol).inverse();
    p_m.compose(&middle.compose(&LinearRelation::graph_of(&i_minus_pn, tol))?)
}

/// Greville's pseudo-inverse form `P_{M // N} = (P_{N⊥} P_M)†`, valid for
/// complementary pairs (`M ∩ N = {0}` and `M ∔ N = H`); other inputs are
/// rejected since the formula is not claimed for them.
pub fn greville_pinv<S: Scalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<DMatrix<S>> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dim("greville_pinv: ambient spaces differ"));
    }
    let overlap = m.intersect(n)?;
    if !overlap.is_zero() {
        return Err(Error::pre(format!(
            "M ∩ N has dimension {}, the pair is not complementary",
            overlap.dim()
        )));
    }
    let span = m.sum(n)?;
    if !span.is_full() {
        return Err(Error::pre(format!(
            "M + N has dimension {} in ambient {}, the pair is not complementary",
            span.dim(),
            span.ambient_dim()
        )));
    }
    let tol = m.tol().max(n.tol());
    let product = n.complement().projector() * m.projector();
    crate::relation::relation_pinv(&product, tol)
}

/// Outcome of the Pták formula, with the kernel identity used in its proof.
#[derive(Debug, Clone)]
pub struct PtakOutcome<S: Scalar> {
    pub relation: LinearRelation<S>,
    /// `ker(I − P_N P_M)`, which must equal `M ∩ N`.
    pub kernel_of_residual: Subspace<S>,
}

/// Pták's formula as a relation identity:
/// `P_{M,N} = (I − P_N P_M)⁻¹ P_{N⊥}|_{M+N}`.
pub fn ptak<S: Scalar>(m: &Subspace<S>, n: &Subspace<S>) -> Result<PtakOutcome<S>> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::dim("ptak: ambient spaces differ"));
    }
    let tol = m.tol().max(n.tol());
    let dim = m.ambient_dim();
    let residual = DMatrix::<S>::identity(dim, dim) - n.projector() * m.projector();
    let restricted =
        LinearRelation::graph_of(&n.complement().projector(), tol).restrict(&m.sum(n)?)?;
    let relation = LinearRelation::graph_of(&residual, tol).inverse().compose(&restricted)?;
    let kernel_of_residual =
        Subspace::from_orthonormal(linalg::nullspace_basis_cutoff(&residual, tol), tol);
    Ok(PtakOutcome { relation, kernel_of_residual })
}

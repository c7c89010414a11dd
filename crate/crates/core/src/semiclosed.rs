//! Operator-range (semiclosed) structure at matrix scale.
//!
//! For a pair of same-size square matrices `A`, `B` presenting `M = ran A`
//! and `N = ran B`, the positive factor `Γ = (AA* + BB*)^{1/2}` carries the
//! whole geometry: Douglas factorizations `A = Γ C_A`, `B = Γ C_B` with
//! contractions into `ran Γ`, the row partial isometry `[C_A C_B]`, quotient
//! representations `L(C, D) = D C⁻¹`, the Ando-style operator-part formulas
//! for `P_{M,N}`, conjugation `Γ⁻¹ P_{M,N} Γ = P_{Γ⁻¹(M), Γ⁻¹(N)}`, the
//! direct splitting `M+N = Γ(ker C_B*) ∔ Γ(ker C_A*) ∔ M∩N`, and the
//! quasi-affinity normal forms. The Gram structure `M(T) = (ran T, ⟨·,·⟩_T)`
//! with `⟨u,v⟩_T = ⟨T†u, T†v⟩` yields Ando's Pythagorean splitting and the
//! de Branges–Rovnyak complement of a contraction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::projection::MvProjection;
use crate::relation::LinearRelation;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// A pair `(A, B)` with its polar data `Γ`, `C_A`, `C_B` and the presented
/// subspaces `M = ran A`, `N = ran B`. Construction verifies the Douglas
/// residuals, the contraction bounds and the partial-isometry identities.
#[derive(Debug, Clone)]
pub struct RangePair<S: Scalar> {
    a: DMatrix<S>,
    b: DMatrix<S>,
    gamma: DMatrix<S>,
    c_a: DMatrix<S>,
    c_b: DMatrix<S>,
    m: Subspace<S>,
    n: Subspace<S>,
    tol: f64,
}

impl<S: Scalar> RangePair<S> {
    /// Left polar decomposition of the row `[A B] = Γ [C_A C_B]`.
    pub fn new(a: DMatrix<S>, b: DMatrix<S>, tol: f64) -> Result<Self> {
        let dim = a.nrows();
        if a.ncols() != dim || b.nrows() != dim || b.ncols() != dim {
            return Err(Error::dim(format!(
                "row_polar needs square matrices of one size, got {}×{} and {}×{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        // Γ = ([A B][A B]*)^{1/2} through the SVD of the row itself: the
        // Gram matrix squares the condition number and its eigenvalues near
        // the cutoff lose half their digits, while the row's singular values
        // come out to full relative accuracy. The Douglas factors are the
        // slices of the polar partial isometry U V*, which equals Γ†[A B]
        // exactly and keeps every identity at rounding level independently
        // of the conditioning.
        let mut row = DMatrix::zeros(dim, 2 * dim);
        row.view_mut((0, 0), (dim, dim)).copy_from(&a);
        row.view_mut((0, dim), (dim, dim)).copy_from(&b);
        let svd = linalg::jacobi_svd(&row);
        let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
        let rank = linalg::rank_with_cutoff(&svd.sigma, tol * sigma_max);
        let mut gamma = DMatrix::<S>::zeros(dim, dim);
        let mut isometry = DMatrix::<S>::zeros(dim, 2 * dim);
        for j in 0..rank {
            let u = svd.u.column(j);
            gamma += u * u.adjoint() * S::from_real(svd.sigma[j]);
            isometry += u * svd.v.column(j).adjoint();
        }
        let c_a = isometry.columns(0, dim).into_owned();
        let c_b = isometry.columns(dim, dim).into_owned();
        let m = Subspace::from_generators(&a, tol);
        let n = Subspace::from_generators(&b, tol);

        let pair = RangePair { a, b, gamma, c_a, c_b, m, n, tol };
        pair.verify()?;
        Ok(pair)
    }

    fn verify(&self) -> Result<()> {
        let scale = linalg::spectral_norm(&self.gamma).max(1.0);
        let tol = self.tol;
        let check = |label: &str, residual: f64, bound: f64| {
            if residual > bound {
                Err(Error::Inconsistent(format!("{label}: residual {residual:.3e}")))
            } else {
                Ok(())
            }
        };
        check("A = ΓC_A", (&self.gamma * &self.c_a - &self.a).norm(), tol * scale * 10.0)?;
        check("B = ΓC_B", (&self.gamma * &self.c_b - &self.b).norm(), tol * scale * 10.0)?;
        check(
            "Γ = AC_A* + BC_B*",
            (&self.a * self.c_a.adjoint() + &self.b * self.c_b.adjoint() - &self.gamma).norm(),
            tol * scale * 10.0,
        )?;
        check("‖C_A‖ ≤ 1", (linalg::spectral_norm(&self.c_a) - 1.0).max(0.0), tol * 10.0)?;
        check("‖C_B‖ ≤ 1", (linalg::spectral_norm(&self.c_b) - 1.0).max(0.0), tol * 10.0)?;

        let gamma_range = self.gamma_range();
        let defect = &self.c_a * self.c_a.adjoint() + &self.c_b * self.c_b.adjoint()
            - gamma_range.projector();
        check("P_ranΓ = C_AC_A* + C_BC_B*", defect.norm(), tol * 10.0)?;
        if !gamma_range.contains(&self.m) || !gamma_range.contains(&self.n) {
            return Err(Error::Inconsistent("ran A + ran B escapes ran Γ".into()));
        }

        // [C_A C_B] is the partial isometry with range ran Γ and the kernel
        // of [A B]
        let row = self.row_of(&self.c_a, &self.c_b);
        let iso_defect = (&row * row.adjoint() * &row - &row).norm();
        check("[C_A C_B] is a partial isometry", iso_defect, tol * 10.0)?;
        let row_ab = self.row_of(&self.a, &self.b);
        let ker_row = Subspace::from_orthonormal(linalg::nullspace_basis(&row_ab, tol), tol);
        let ker_c = Subspace::from_orthonormal(
            linalg::nullspace_basis_cutoff(&row, tol),
            tol,
        );
        if !ker_row.equals(&ker_c) {
            return Err(Error::Inconsistent("ker [C_A C_B] differs from ker [A B]".into()));
        }
        Ok(())
    }

    fn row_of(&self, left: &DMatrix<S>, right: &DMatrix<S>) -> DMatrix<S> {
        let dim = self.dim();
        let mut row = DMatrix::zeros(dim, 2 * dim);
        row.view_mut((0, 0), (dim, dim)).copy_from(left);
        row.view_mut((0, dim), (dim, dim)).copy_from(right);
        row
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<S> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<S> {
        &self.b
    }

    pub fn gamma(&self) -> &DMatrix<S> {
        &self.gamma
    }

    pub fn c_a(&self) -> &DMatrix<S> {
        &self.c_a
    }

    pub fn c_b(&self) -> &DMatrix<S> {
        &self.c_b
    }

    /// `M = ran A`.
    pub fn range_m(&self) -> &Subspace<S> {
        &self.m
    }

    /// `N = ran B`.
    pub fn range_n(&self) -> &Subspace<S> {
        &self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `ran Γ = M + N`.
    pub fn gamma_range(&self) -> Subspace<S> {
        Subspace::from_generators(&self.gamma, self.tol)
    }

    /// The direct construction `P_{ran A, ran B}`.
    pub fn direct_projection(&self) -> Result<MvProjection<S>> {
        MvProjection::new(&self.m, &self.n)
    }
}

/// The quotient relation `L(C, D) = {(Cx, Dx)} = D C⁻¹`.
pub fn quotient<S: Scalar>(c: &DMatrix<S>, d: &DMatrix<S>, tol: f64) -> Result<LinearRelation<S>> {
    if c.ncols() != d.ncols() {
        return Err(Error::dim(format!(
            "quotient: C has {} columns, D has {}",
            c.ncols(),
            d.ncols()
        )));
    }
    let mut stacked = DMatrix::zeros(c.nrows() + d.nrows(), c.ncols());
    stacked.view_mut((0, 0), (c.nrows(), c.ncols())).copy_from(c);
    stacked.view_mut((c.nrows(), 0), (d.nrows(), d.ncols())).copy_from(d);
    LinearRelation::from_graph(
        c.nrows(),
        d.nrows(),
        Subspace::from_generators(&stacked, tol),
    )
}

/// One canonical quotient presentation of a relation: the orthonormal graph
/// basis split into its blocks, so `quotient(C, D) = T` by construction.
/// Any relation admits many presentations; this one is deterministic.
pub fn as_quotient<S: Scalar>(t: &LinearRelation<S>) -> (DMatrix<S>, DMatrix<S>) {
    let basis = t.graph().basis();
    let c = basis.rows(0, t.dim_in()).into_owned();
    let d = basis.rows(t.dim_in(), t.dim_out()).into_owned();
    (c, d)
}

/// The operator-range presentation `E = L([A B], [A 0])` of `P_{ran A, ran B}`.
pub fn semiclosed_projection<S: Scalar>(
    a: &DMatrix<S>,
    b: &DMatrix<S>,
    tol: f64,
) -> Result<LinearRelation<S>> {
    let dim = a.nrows();
    if a.ncols() != dim || b.nrows() != dim || b.ncols() != dim {
        return Err(Error::dim("semiclosed_projection needs square matrices of one size"));
    }
    let mut top = DMatrix::zeros(dim, 2 * dim);
    top.view_mut((0, 0), (dim, dim)).copy_from(a);
    top.view_mut((0, dim), (dim, dim)).copy_from(b);
    let mut bottom = DMatrix::zeros(dim, 2 * dim);
    bottom.view_mut((0, 0), (dim, dim)).copy_from(a);
    quotient(&top, &bottom, tol)
}

/// Both Ando-style forms of `P_{M,N}`, each verified against the direct
/// construction.
#[derive(Debug, Clone)]
pub struct AndoForms<S: Scalar> {
    /// `Γ C_A C_A* Γ⁻¹ ∔̂ ({0} × M∩N)`.
    pub via_gamma: LinearRelation<S>,
    /// `(Γ⁻¹ A A*)* Γ⁻¹ ∔̂ ({0} × M∩N)`.
    pub via_adjoint: LinearRelation<S>,
    /// The operator part `Γ C_A C_A* Γ⁻¹` alone.
    pub operator_part: LinearRelation<S>,
}

/// Build `P_{M,N}` through the two Γ-formulas and check both against
/// `I_M +̂ (N × {0})`, including that the first summand is an operator part
/// (single-valued, with domain `M + N`, contained in the projection).
pub fn ando_projection<S: Scalar>(pair: &RangePair<S>) -> Result<AndoForms<S>> {
    let tol = pair.tol();
    let dim = pair.dim();
    let direct = pair.direct_projection()?.into_relation();
    let overlap = pair.range_m().intersect(pair.range_n())?;
    let mul_term = LinearRelation::product_of(&Subspace::zero(dim, tol), &overlap)?;
    let gamma_inverse = LinearRelation::graph_of(pair.gamma(), tol).inverse();

    let front = pair.gamma() * pair.c_a() * pair.c_a().adjoint();
    let operator_part = LinearRelation::graph_of(&front, tol).compose(&gamma_inverse)?;
    if !operator_part.is_operator() {
        return Err(Error::Inconsistent("Γ C_A C_A* Γ⁻¹ is multivalued".into()));
    }
    if !operator_part.dom().equals(&pair.range_m().sum(pair.range_n())?) {
        return Err(Error::Inconsistent("operator part has the wrong domain".into()));
    }
    if !direct.graph().contains(operator_part.graph()) {
        return Err(Error::Inconsistent("operator part escapes P_{M,N}".into()));
    }
    let via_gamma_sum = operator_part.cw_sum(&mul_term)?;
    if !via_gamma_sum.direct {
        return Err(Error::Inconsistent("Γ-form sum is not direct".into()));
    }
    let via_gamma = via_gamma_sum.relation;
    if !via_gamma.rel_eq(&direct) {
        return Err(Error::Inconsistent("Γ-form differs from the direct construction".into()));
    }

    let aa_star = pair.a() * pair.a().adjoint();
    let inner = gamma_inverse.compose(&LinearRelation::graph_of(&aa_star, tol))?;
    let via_adjoint = inner
        .adjoint()
        .compose(&gamma_inverse)?
        .cw_sum(&mul_term)?
        .relation;
    if !via_adjoint.rel_eq(&direct) {
        return Err(Error::Inconsistent(
            "adjoint form differs from the direct construction".into(),
        ));
    }
    Ok(AndoForms { via_gamma, via_adjoint, operator_part })
}

/// Outcome of conjugating `P_{M,N}` by a relation `Γ`.
#[derive(Debug, Clone)]
pub struct Conjugated<S: Scalar> {
    pub relation: LinearRelation<S>,
    pub preimage_m: Subspace<S>,
    pub preimage_n: Subspace<S>,
}

/// `Γ⁻¹ P_{M,N} Γ = P_{Γ⁻¹(M), Γ⁻¹(N)}` under the hypotheses
/// `ran Γ = M + N` and `mul Γ ⊆ N`; violated hypotheses are reported by name.
pub fn conjugate<S: Scalar>(
    gamma: &LinearRelation<S>,
    m: &Subspace<S>,
    n: &Subspace<S>,
) -> Result<Conjugated<S>> {
    let together = m.sum(n)?;
    if !gamma.ran().equals(&together) {
        return Err(Error::pre("conjugate: hypothesis ran Γ = M + N fails"));
    }
    if !n.contains(&gamma.mul_part()) {
        return Err(Error::pre("conjugate: hypothesis mul Γ ⊆ N fails"));
    }
    let p = MvProjection::new(m, n)?.into_relation();
    let relation = gamma.inverse().compose(&p.compose(gamma)?)?;
    let preimage_m = gamma.inverse().image(m)?;
    let preimage_n = gamma.inverse().image(n)?;
    let expected = MvProjection::new(&preimage_m, &preimage_n)?.into_relation();
    if !relation.rel_eq(&expected) {
        return Err(Error::Inconsistent(format!(
            "conjugation law fails: graph distance {:.3e}",
            relation.graph_distance(&expected)
        )));
    }
    Ok(Conjugated { relation, preimage_m, preimage_n })
}

/// Quasi-affinity normal form data on the frame `M + N`.
#[derive(Debug, Clone)]
pub struct QuasiAffineForm<S: Scalar> {
    /// Orthonormal basis of the frame `M + N = ran Γ`.
    pub frame: Subspace<S>,
    /// `X = Γ` compressed to the frame: positive and injective there.
    pub x_frame: DMatrix<S>,
    /// `C = C_A C_A*` compressed to the frame: a positive contraction.
    pub c_frame: DMatrix<S>,
    /// `S = ran C_A ∩ ran C_B`.
    pub overlap_s: Subspace<S>,
}

/// The intertwining `P_{M,N} X = X (C ∔̂ ({0} × S))` with `X = Γ`,
/// `C = C_A C_A*`, `S = ran C_A ∩ ran C_B`, verified as a relation equality
/// in the ambient space; the frame compressions of `X` and `C` are returned
/// with their positivity/contraction properties checked.
pub fn quasi_affine_form<S: Scalar>(pair: &RangePair<S>) -> Result<QuasiAffineForm<S>> {
    let tol = pair.tol();
    let frame = pair.gamma_range();
    let ran_ca = Subspace::from_generators(pair.c_a(), tol);
    let ran_cb = Subspace::from_generators(pair.c_b(), tol);
    let overlap_s = ran_ca.intersect(&ran_cb)?;

    let c_matrix = pair.c_a() * pair.c_a().adjoint();
    let x_rel = LinearRelation::graph_of(pair.gamma(), tol);
    let p = pair.direct_projection()?.into_relation();
    let lhs = p.compose(&x_rel)?;
    let inner = LinearRelation::graph_of(&c_matrix, tol)
        .cw_sum(&LinearRelation::product_of(
            &Subspace::zero(pair.dim(), tol),
            &overlap_s,
        )?)?
        .relation;
    let rhs = x_rel.compose(&inner)?;
    if !lhs.rel_eq(&rhs) {
        return Err(Error::Inconsistent(format!(
            "quasi-affine intertwining fails: graph distance {:.3e}",
            lhs.graph_distance(&rhs)
        )));
    }

    let u = frame.basis();
    let x_frame = u.adjoint() * pair.gamma() * u;
    let c_frame = u.adjoint() * &c_matrix * u;
    let (x_eigs, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&x_frame));
    if let Some(min) = x_eigs.last() {
        if *min <= 0.0 {
            return Err(Error::Inconsistent("X is not positive definite on the frame".into()));
        }
    }
    let c_norm = linalg::spectral_norm(&c_frame);
    if c_norm > 1.0 + 10.0 * tol {
        return Err(Error::Inconsistent(format!("C is not a contraction: ‖C‖ = {c_norm}")));
    }
    Ok(QuasiAffineForm { frame, x_frame, c_frame, overlap_s })
}

/// The three summands of `M + N = Γ(ker C_B*) ∔ Γ(ker C_A*) ∔ (M ∩ N)`.
#[derive(Debug, Clone)]
pub struct GammaSplitting<S: Scalar> {
    /// `Γ(ker C_B*)`, the complement of `M ∩ N` inside `M`.
    pub in_m: Subspace<S>,
    /// `Γ(ker C_A*)`, the complement of `M ∩ N` inside `N`.
    pub in_n: Subspace<S>,
    pub overlap: Subspace<S>,
    /// `P_{Γ(ker C_B*) // N}`, the operator summand of the corollary form.
    pub projection_part: LinearRelation<S>,
}

/// Compute the Γ-splitting and verify directness, the two displayed
/// equalities `M = Γ(ker C_B*) ∔ M∩N`, `N = Γ(ker C_A*) ∔ M∩N`, and the
/// relation identity `P_{M,N} = P_{Γ(ker C_B*) // N} ∔̂ ({0} × M∩N)`.
pub fn gamma_splitting<S: Scalar>(pair: &RangePair<S>) -> Result<GammaSplitting<S>> {
    let tol = pair.tol();
    let ker_cb_star = Subspace::from_orthonormal(
        linalg::nullspace_basis_cutoff(&pair.c_b().adjoint(), tol),
        tol,
    );
    let ker_ca_star = Subspace::from_orthonormal(
        linalg::nullspace_basis_cutoff(&pair.c_a().adjoint(), tol),
        tol,
    );
    let in_m = ker_cb_star.image_under(pair.gamma())?;
    let in_n = ker_ca_star.image_under(pair.gamma())?;
    let overlap = pair.range_m().intersect(pair.range_n())?;

    let together = pair.range_m().sum(pair.range_n())?;
    if in_m.dim() + in_n.dim() + overlap.dim() != together.dim() {
        return Err(Error::Inconsistent(format!(
            "splitting dimensions {} + {} + {} do not reach dim(M+N) = {}",
            in_m.dim(),
            in_n.dim(),
            overlap.dim(),
            together.dim()
        )));
    }
    for (label, x, y) in [
        ("Γ(ker C_B*) ∩ Γ(ker C_A*)", &in_m, &in_n),
        ("Γ(ker C_B*) ∩ M∩N", &in_m, &overlap),
        ("Γ(ker C_A*) ∩ M∩N", &in_n, &overlap),
    ] {
        if !x.intersect(y)?.is_zero() {
            return Err(Error::Inconsistent(format!("{label} is nontrivial")));
        }
    }
    if !in_m.sum(&overlap)?.equals(pair.range_m()) {
        return Err(Error::Inconsistent("M ≠ Γ(ker C_B*) ∔ M∩N".into()));
    }
    if !in_n.sum(&overlap)?.equals(pair.range_n()) {
        return Err(Error::Inconsistent("N ≠ Γ(ker C_A*) ∔ M∩N".into()));
    }

    let projection_part = MvProjection::new(&in_m, pair.range_n())?.into_relation();
    if !projection_part.is_operator() {
        return Err(Error::Inconsistent("P_{Γ(ker C_B*) // N} is multivalued".into()));
    }
    let mul_term = LinearRelation::product_of(&Subspace::zero(pair.dim(), tol), &overlap)?;
    let combined = projection_part.cw_sum(&mul_term)?;
    if !combined.direct {
        return Err(Error::Inconsistent("corollary sum is not direct".into()));
    }
    if !combined.relation.rel_eq(&pair.direct_projection()?.into_relation()) {
        return Err(Error::Inconsistent("corollary form differs from P_{M,N}".into()));
    }
    Ok(GammaSplitting { in_m, in_n, overlap, projection_part })
}

/// Result of orthogonalizing `P_{M,N}` by conjugation with `Γ`.
#[derive(Debug, Clone)]
pub struct Orthogonalized<S: Scalar> {
    /// The orthogonal projector `P₀ = P_{ker C_B* ⊖ (ker C_A* ∩ ker C_B*)}`.
    pub p0: DMatrix<S>,
    /// `S = Γ⁻¹(M ∩ N)`, a closed subspace containing `ker Γ`.
    pub s: Subspace<S>,
    /// The conjugated relation `Γ⁻¹ P_{M,N} Γ = P₀ ⊕̂ ({0} × S)`.
    pub conjugated: LinearRelation<S>,
}

/// Conjugate `E = P_{M,N}` by `Γ` and exhibit the closed multivalued
/// projection `P₀ ⊕̂ ({0} × S)` it becomes, verifying that `P₀` is an
/// orthogonal projector equal to the intersection operator of the conjugated
/// relation, and the intertwining `P_{M,N} Γ = Γ (P₀ ⊕̂ ({0} × S))`.
pub fn orthogonalize<S: Scalar>(pair: &RangePair<S>) -> Result<Orthogonalized<S>> {
    let tol = pair.tol();
    let dim = pair.dim();
    let ker_cb_star = Subspace::from_orthonormal(
        linalg::nullspace_basis_cutoff(&pair.c_b().adjoint(), tol),
        tol,
    );
    let ker_ca_star = Subspace::from_orthonormal(
        linalg::nullspace_basis_cutoff(&pair.c_a().adjoint(), tol),
        tol,
    );
    let reduced = ker_cb_star.minus(&ker_ca_star.intersect(&ker_cb_star)?)?;
    let p0 = reduced.projector();
    let scale = 1.0f64.max(linalg::spectral_norm(&p0));
    if linalg::op_distance(&(&p0 * &p0), &p0) > tol * scale
        || linalg::op_distance(&p0.adjoint(), &p0) > tol * scale
    {
        return Err(Error::Inconsistent("P₀ is not an orthogonal projector".into()));
    }

    let gamma_rel = LinearRelation::graph_of(pair.gamma(), tol);
    let p = pair.direct_projection()?.into_relation();
    let conjugated = gamma_rel.inverse().compose(&p.compose(&gamma_rel)?)?;

    let overlap = pair.range_m().intersect(pair.range_n())?;
    let s = overlap.preimage_under(pair.gamma())?;
    let split = LinearRelation::graph_of(&p0, tol)
        .cw_sum(&LinearRelation::product_of(&Subspace::zero(dim, tol), &s)?)?;
    if !split.orthogonal {
        return Err(Error::Inconsistent("P₀ ⊕̂ ({0}×S) sum is not orthogonal".into()));
    }
    if !conjugated.rel_eq(&split.relation) {
        return Err(Error::Inconsistent(format!(
            "conjugated relation differs from P₀ ⊕̂ ({{0}}×S): distance {:.3e}",
            conjugated.graph_distance(&split.relation)
        )));
    }
    let t0_of_conj = crate::decomposition::t0(&conjugated)?;
    if !t0_of_conj.rel_eq(&LinearRelation::graph_of(&p0, tol)) {
        return Err(Error::Inconsistent("(Γ⁻¹EΓ)₀ differs from P₀".into()));
    }
    // final corollary: P_{M,N} Γ = Γ (P₀ ⊕̂ ({0} × S))
    let lhs = p.compose(&gamma_rel)?;
    let rhs = gamma_rel.compose(&split.relation)?;
    if !lhs.rel_eq(&rhs) {
        return Err(Error::Inconsistent(format!(
            "orthogonalized intertwining fails: graph distance {:.3e}",
            lhs.graph_distance(&rhs)
        )));
    }
    Ok(Orthogonalized { p0, s, conjugated })
}

/// `ran T` carrying the Gram inner product `⟨u,v⟩_T = ⟨T†u, T†v⟩`.
#[derive(Debug, Clone)]
pub struct OperatorRangeSpace<S: Scalar> {
    t: DMatrix<S>,
    pinv_t: DMatrix<S>,
    range: Subspace<S>,
    tol: f64,
}

impl<S: Scalar> OperatorRangeSpace<S> {
    pub fn new(t: DMatrix<S>, tol: f64) -> Self {
        let pinv_t = linalg::pinv(&t, tol);
        let range = Subspace::from_generators(&t, tol);
        OperatorRangeSpace { t, pinv_t, range, tol }
    }

    pub fn operator(&self) -> &DMatrix<S> {
        &self.t
    }

    pub fn range(&self) -> &Subspace<S> {
        &self.range
    }

    fn member(&self, u: &DVector<S>) -> Result<()> {
        let norm = u.norm();
        if norm == 0.0 {
            return Ok(());
        }
        if (u - self.range.project_vector(u)).norm() > self.tol * norm {
            return Err(Error::pre("vector lies outside ran T"));
        }
        Ok(())
    }

    /// `⟨u, v⟩_T`, defined for members of `ran T`; conjugate-linear in the
    /// first argument.
    pub fn inner(&self, u: &DVector<S>, v: &DVector<S>) -> Result<S> {
        self.member(u)?;
        self.member(v)?;
        let pu = &self.pinv_t * u;
        let pv = &self.pinv_t * v;
        Ok(pu.dotc(&pv))
    }

    /// `‖u‖_T = ‖T† u‖`.
    pub fn norm(&self, u: &DVector<S>) -> Result<f64> {
        self.member(u)?;
        Ok((&self.pinv_t * u).norm())
    }
}

/// Ando's Pythagorean splitting of `u ∈ ran T`, `T = (T₁T₁* + T₂T₂*)^{1/2}`.
#[derive(Debug, Clone)]
pub struct AndoSplit<S: Scalar> {
    pub u1: DVector<S>,
    pub u2: DVector<S>,
    /// `‖u‖²_T`.
    pub total: f64,
    /// `‖u₁‖²_{T₁} + ‖u₂‖²_{T₂}`.
    pub split_sum: f64,
}

/// Split `u = u₁ + u₂` with `u₁ ∈ ran T₁`, `u₂ ∈ ran T₂` and
/// `‖u‖²_T = ‖u₁‖²_{T₁} + ‖u₂‖²_{T₂}`; the unique minimizing decomposition.
pub fn ando_split<S: Scalar>(
    t1: &DMatrix<S>,
    t2: &DMatrix<S>,
    u: &DVector<S>,
    tol: f64,
) -> Result<AndoSplit<S>> {
    let dim = t1.nrows();
    if t2.nrows() != dim || u.len() != dim {
        return Err(Error::dim("ando_split: sizes differ"));
    }
    let gram = linalg::hermitian_part(&(t1 * t1.adjoint() + t2 * t2.adjoint()));
    let t = linalg::hermitian_sqrt_psd(&gram, tol);
    let space = OperatorRangeSpace::new(t.clone(), tol);
    space.member(u).map_err(|_| Error::pre("ando_split: u lies outside ran T"))?;

    let t_pinv = linalg::pinv(&t, tol);
    let c1 = &t_pinv * t1;
    let c2 = &t_pinv * t2;
    let w = &t_pinv * u;
    let u1 = t1 * (c1.adjoint() * &w);
    let u2 = t2 * (c2.adjoint() * &w);

    let space1 = OperatorRangeSpace::new(t1.clone(), tol);
    let space2 = OperatorRangeSpace::new(t2.clone(), tol);
    let total = space.norm(u)?.powi(2);
    let split_sum = space1.norm(&u1)?.powi(2) + space2.norm(&u2)?.powi(2);
    let scale = u.norm().max(1.0);
    if (&u1 + &u2 - u).norm() > 10.0 * tol * scale {
        return Err(Error::Inconsistent("split does not sum back to u".into()));
    }
    Ok(AndoSplit { u1, u2, total, split_sum })
}

/// The de Branges–Rovnyak complement data of a contraction.
#[derive(Debug, Clone)]
pub struct DeBranges<S: Scalar> {
    /// `S = ran T`.
    pub space: Subspace<S>,
    /// `S' = ran (I − TT*)^{1/2}`.
    pub complement_space: Subspace<S>,
    /// The overlapping space `S ∩ S'`.
    pub overlap: Subspace<S>,
    /// `P_{S, S'}`.
    pub relation: LinearRelation<S>,
    /// `‖P_{S,S'}‖`, the norm of the operator part; at most 1.
    pub op_norm: f64,
    pub norm_bound_ok: bool,
}

/// De Branges–Rovnyak complement of a contraction `T`: `S' = M((I−TT*)^{1/2})`
/// with `S + S' = H`, and `P_{S,S'}` is itself a contraction.
pub fn debranges<S: Scalar>(t: &DMatrix<S>, tol: f64) -> Result<DeBranges<S>> {
    let dim = t.nrows();
    if t.ncols() != dim {
        return Err(Error::dim("debranges: matrix must be square"));
    }
    let norm_t = linalg::spectral_norm(t);
    if norm_t > 1.0 + tol {
        return Err(Error::pre(format!("debranges: ‖T‖ = {norm_t} exceeds 1")));
    }
    let defect = DMatrix::<S>::identity(dim, dim) - t * t.adjoint();
    let defect_root = linalg::hermitian_sqrt_psd(&linalg::hermitian_part(&defect), tol);
    let space = Subspace::from_generators(t, tol);
    let complement_space = Subspace::from_generators(&defect_root, tol);
    if !space.sum(&complement_space)?.is_full() {
        return Err(Error::Inconsistent("S + S' is not the whole space".into()));
    }
    let overlap = space.intersect(&complement_space)?;
    let relation = MvProjection::new(&space, &complement_space)?.into_relation();
    let (_, op_norm) = relation.operator_part_matrix();
    let norm_bound_ok = op_norm <= 1.0 + tol;
    Ok(DeBranges { space, complement_space, overlap, relation, op_norm, norm_bound_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, gaussian_vector, trial_rng};
    use nalgebra::ComplexField;
    use num_complex::Complex64;

    const TOL: f64 = 1e-9;

    fn diag<S: Scalar>(entries: &[f64]) -> DMatrix<S> {
        DMatrix::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j {
                S::from_real(entries[i])
            } else {
                S::zero()
            }
        })
    }

    fn random_pair<S: Scalar>(seed: u64, max_dim: usize) -> RangePair<S> {
        let mut rng = trial_rng(seed, "semiclosed-pair", 0);
        let n = 2 + (seed as usize) % (max_dim - 1);
        let ra = 1 + (seed as usize * 3) % n;
        let rb = 1 + (seed as usize * 5) % n;
        let a = gaussian_matrix::<S, _>(&mut rng, n, ra) * gaussian_matrix::<S, _>(&mut rng, ra, n);
        let b = gaussian_matrix::<S, _>(&mut rng, n, rb) * gaussian_matrix::<S, _>(&mut rng, rb, n);
        RangePair::new(a, b, TOL).unwrap()
    }

    #[test]
    fn row_polar_trivial_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        let zero = DMatrix::<f64>::zeros(3, 3);
        let pair = RangePair::new(id.clone(), zero.clone(), TOL).unwrap();
        assert!((pair.gamma() - &id).norm() < 1e-10);
        assert!((pair.c_a() - &id).norm() < 1e-10);
        assert!(pair.c_b().norm() < 1e-10);

        let pair = RangePair::new(id.clone(), id.clone(), TOL).unwrap();
        assert!((pair.gamma() - &id * 2f64.sqrt()).norm() < 1e-9);
        assert!((pair.c_a() - &id / 2f64.sqrt()).norm() < 1e-9);
        assert!((pair.c_b() - &id / 2f64.sqrt()).norm() < 1e-9);

        let pair = RangePair::new(diag::<f64>(&[2.0, 0.0]), DMatrix::zeros(2, 2), TOL).unwrap();
        assert!((pair.gamma() - diag::<f64>(&[2.0, 0.0])).norm() < 1e-10);
        assert!((pair.c_a() - diag::<f64>(&[1.0, 0.0])).norm() < 1e-10);
    }

    #[test]
    fn row_polar_invariants_hold_for_random_pairs() {
        for seed in 0..40 {
            let _ = random_pair::<f64>(seed, 8); // constructor verifies
        }
        for seed in 0..15 {
            let _ = random_pair::<Complex64>(seed, 6);
        }
    }

    #[test]
    fn quotient_cases() {
        let mut rng = trial_rng(1, "quotient", 0);
        let a = gaussian_matrix::<f64, _>(&mut rng, 3, 3);
        let q = quotient(&DMatrix::identity(3, 3), &a, TOL).unwrap();
        assert!(q.rel_eq(&LinearRelation::graph_of(&a, TOL)));

        let q = quotient(&diag::<f64>(&[1.0, 0.0]), &DMatrix::identity(2, 2), TOL).unwrap();
        let parts = q.parts();
        assert_eq!(parts.dom.dim(), 1);
        assert!(parts.dom.basis()[(0, 0)].modulus() > 0.9);
        assert_eq!(parts.mul.dim(), 1);
        assert!(parts.mul.basis()[(1, 0)].modulus() > 0.9);
    }

    #[test]
    fn quotient_parts_match_kernel_image_oracles() {
        // dom = ran C, ran = ran D, ker = C(ker D), mul = D(ker C)
        let mut rng = trial_rng(2, "quotient-parts", 0);
        for trial in 0..30 {
            let h = 2 + trial % 3;
            let c = gaussian_matrix::<f64, _>(&mut rng, 3, 2) * gaussian_matrix::<f64, _>(&mut rng, 2, h);
            let d = gaussian_matrix::<f64, _>(&mut rng, 3, 2) * gaussian_matrix::<f64, _>(&mut rng, 2, h);
            let q = quotient(&c, &d, TOL).unwrap();
            let parts = q.parts();
            assert!(parts.dom.equals(&Subspace::from_generators(&c, TOL)));
            assert!(parts.ran.equals(&Subspace::from_generators(&d, TOL)));
            let ker_d = Subspace::from_orthonormal(linalg::nullspace_basis(&d, TOL), TOL);
            let ker_c = Subspace::from_orthonormal(linalg::nullspace_basis(&c, TOL), TOL);
            assert!(parts.ker.equals(&ker_d.image_under(&c).unwrap()));
            assert!(parts.mul.equals(&ker_c.image_under(&d).unwrap()));
        }
    }

    #[test]
    fn as_quotient_round_trips() {
        let mut rng = trial_rng(3, "as-quotient", 0);
        for trial in 0..20 {
            let d = 2 + trial % 3;
            let graph = Subspace::<Complex64>::random(&mut rng, 2 * d, 1 + trial % (2 * d), TOL).unwrap();
            let t = LinearRelation::from_graph(d, d, graph).unwrap();
            let (c, dd) = as_quotient(&t);
            assert!(quotient(&c, &dd, TOL).unwrap().rel_eq(&t));
        }
    }

    #[test]
    fn semiclosed_projection_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        let zero = DMatrix::<f64>::zeros(3, 3);
        let e = semiclosed_projection(&id, &zero, TOL).unwrap();
        assert!(e.rel_eq(&LinearRelation::graph_of(&id, TOL)));
        let e = semiclosed_projection(&zero, &id, TOL).unwrap();
        assert!(e.rel_eq(&LinearRelation::graph_of(&zero, TOL)));
        for seed in 0..40 {
            let pair = random_pair::<f64>(seed, 7);
            let e = semiclosed_projection(pair.a(), pair.b(), TOL).unwrap();
            let direct = pair.direct_projection().unwrap();
            assert!(e.rel_eq(direct.relation()), "L-form failed at seed {seed}");
        }
    }

    #[test]
    fn ando_projection_cases() {
        let id = DMatrix::<f64>::identity(2, 2);
        let pair = RangePair::new(id.clone(), DMatrix::zeros(2, 2), TOL).unwrap();
        let forms = ando_projection(&pair).unwrap();
        assert!(forms.operator_part.rel_eq(&LinearRelation::graph_of(&id, TOL)));

        // full overlap: A = B
        let mut rng = trial_rng(4, "ando-eq", 0);
        let a = gaussian_matrix::<f64, _>(&mut rng, 3, 3);
        let pair = RangePair::new(a.clone(), a.clone(), TOL).unwrap();
        let forms = ando_projection(&pair).unwrap();
        let direct = pair.direct_projection().unwrap();
        assert!(forms.via_gamma.rel_eq(direct.relation()));

        for seed in 0..30 {
            let pair = random_pair::<f64>(seed, 8);
            ando_projection(&pair).unwrap(); // all equalities asserted inside
        }
        for seed in 0..10 {
            let pair = random_pair::<Complex64>(seed, 5);
            ando_projection(&pair).unwrap();
        }
    }

    #[test]
    fn conjugate_cases() {
        // Γ = I needs M + N = H
        let mut rng = trial_rng(5, "conjugate", 0);
        let m = Subspace::<f64>::random(&mut rng, 4, 3, TOL).unwrap();
        let n = Subspace::<f64>::random(&mut rng, 4, 2, TOL).unwrap();
        assert!(m.sum(&n).unwrap().is_full());
        let id_rel = LinearRelation::graph_of(&DMatrix::<f64>::identity(4, 4), TOL);
        let out = conjugate(&id_rel, &m, &n).unwrap();
        let p = MvProjection::new(&m, &n).unwrap();
        assert!(out.relation.rel_eq(p.relation()));

        // Γ = 2I leaves the projection unchanged
        let two_rel = LinearRelation::graph_of(&(DMatrix::<f64>::identity(4, 4) * 2.0), TOL);
        let out = conjugate(&two_rel, &m, &n).unwrap();
        assert!(out.relation.rel_eq(p.relation()));
        assert!(out.preimage_m.equals(&m));

        // violated hypothesis is named
        let small = Subspace::<f64>::random(&mut rng, 4, 1, TOL).unwrap();
        let err = conjugate(&id_rel, &small, &small).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("ran Γ")));
    }

    #[test]
    fn conjugate_random_psd_with_matching_range() {
        // Γ = U D U* with U spanning M + N; preimages cross-checked against
        // the nullspace oracle ker((I − P_M) Γ)
        let mut rng = trial_rng(6, "conjugate-psd", 0);
        for trial in 0..25 {
            let dim = 3 + trial % 3;
            let m = Subspace::<f64>::random(&mut rng, dim, 1 + trial % 2, TOL).unwrap();
            let n = Subspace::<f64>::random(&mut rng, dim, 1 + (trial / 2) % 2, TOL).unwrap();
            let frame = m.sum(&n).unwrap();
            let r = frame.dim();
            let core = gaussian_matrix::<f64, _>(&mut rng, r, r);
            let pos = &core * core.transpose() + DMatrix::<f64>::identity(r, r) * 0.1;
            let gamma = frame.basis() * pos * frame.basis().transpose();
            let gamma_rel = LinearRelation::graph_of(&gamma, TOL);
            let out = conjugate(&gamma_rel, &m, &n).unwrap();
            let oracle_pre_m = Subspace::from_orthonormal(
                linalg::nullspace_basis(
                    &((DMatrix::<f64>::identity(dim, dim) - m.projector()) * &gamma),
                    TOL,
                ),
                TOL,
            );
            assert!(
                out.preimage_m.equals(&oracle_pre_m),
                "preimage oracle mismatch at trial {trial}"
            );
        }
    }

    #[test]
    fn quasi_affine_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        let zero = DMatrix::<f64>::zeros(3, 3);
        let form = quasi_affine_form(&RangePair::new(id.clone(), zero.clone(), TOL).unwrap()).unwrap();
        assert!((form.x_frame - DMatrix::<f64>::identity(3, 3)).norm() < 1e-9);
        assert!((form.c_frame - DMatrix::<f64>::identity(3, 3)).norm() < 1e-9);
        assert!(form.overlap_s.is_zero());

        let form = quasi_affine_form(&RangePair::new(zero, id, TOL).unwrap()).unwrap();
        assert!(form.c_frame.norm() < 1e-9);
        assert!(form.overlap_s.is_zero());

        for seed in 0..30 {
            let pair = random_pair::<f64>(seed, 7);
            quasi_affine_form(&pair).unwrap();
        }
    }

    #[test]
    fn gamma_splitting_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        let zero = DMatrix::<f64>::zeros(3, 3);
        let split = gamma_splitting(&RangePair::new(id.clone(), zero, TOL).unwrap()).unwrap();
        assert!(split.in_m.is_full());
        assert!(split.in_n.is_zero());
        assert!(split.overlap.is_zero());

        let split = gamma_splitting(&RangePair::new(id.clone(), id, TOL).unwrap()).unwrap();
        assert!(split.in_m.is_zero());
        assert!(split.in_n.is_zero());
        assert!(split.overlap.is_full());

        for seed in 0..30 {
            let pair = random_pair::<f64>(seed, 7);
            gamma_splitting(&pair).unwrap(); // directness asserted inside
        }
    }

    #[test]
    fn orthogonalize_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        let zero = DMatrix::<f64>::zeros(3, 3);
        let out = orthogonalize(&RangePair::new(id.clone(), zero, TOL).unwrap()).unwrap();
        assert!((out.p0 - DMatrix::<f64>::identity(3, 3)).norm() < 1e-9);
        assert!(out.s.is_zero());

        let out = orthogonalize(
            &RangePair::new(diag::<f64>(&[1.0, 0.0]), diag::<f64>(&[0.0, 1.0]), TOL).unwrap(),
        )
        .unwrap();
        assert!((out.p0 - diag::<f64>(&[1.0, 0.0])).norm() < 1e-9);
        assert!(out.s.is_zero());

        for seed in 0..25 {
            let pair = random_pair::<f64>(seed, 7);
            orthogonalize(&pair).unwrap();
        }
        for seed in 0..8 {
            let pair = random_pair::<Complex64>(seed, 5);
            orthogonalize(&pair).unwrap();
        }
    }

    #[test]
    fn gram_inner_product_cases() {
        let mut rng = trial_rng(7, "gram", 0);
        let u = gaussian_vector::<f64, _>(&mut rng, 3);
        let v = gaussian_vector::<f64, _>(&mut rng, 3);
        let space = OperatorRangeSpace::new(DMatrix::<f64>::identity(3, 3), TOL);
        assert!((space.inner(&u, &v).unwrap() - u.dot(&v)).abs() < 1e-10);
        let space2 = OperatorRangeSpace::new(DMatrix::<f64>::identity(3, 3) * 2.0, TOL);
        assert!((space2.norm(&u).unwrap() - u.norm() / 2.0).abs() < 1e-10);

        // ‖u‖ ≤ ‖T‖ ‖u‖_T on ran T
        for trial in 0..30 {
            let t = gaussian_matrix::<f64, _>(&mut rng, 4, 2) * gaussian_matrix::<f64, _>(&mut rng, 2, 4);
            let space = OperatorRangeSpace::new(t.clone(), TOL);
            let x = gaussian_vector::<f64, _>(&mut rng, 4);
            let u = &t * x;
            let bound = linalg::spectral_norm(&t) * space.norm(&u).unwrap();
            assert!(u.norm() <= bound * (1.0 + 1e-9), "trial {trial}");
        }

        // membership is enforced
        let line = OperatorRangeSpace::new(diag::<f64>(&[1.0, 0.0]), TOL);
        let outside = DVector::from_column_slice(&[0.0, 1.0]);
        assert!(line.norm(&outside).is_err());
    }

    #[test]
    fn ando_split_trivial_cases() {
        let mut rng = trial_rng(8, "split", 0);
        let u = gaussian_vector::<f64, _>(&mut rng, 3);
        let id = DMatrix::<f64>::identity(3, 3);
        let out = ando_split(&id, &DMatrix::zeros(3, 3), &u, TOL).unwrap();
        assert!((&out.u1 - &u).norm() < 1e-10);
        assert!(out.u2.norm() < 1e-10);

        let half = &id / 2f64.sqrt();
        let out = ando_split(&half, &half, &u, TOL).unwrap();
        assert!((&out.u1 - &u / 2.0).norm() < 1e-9);
        assert!((&out.u2 - &u / 2.0).norm() < 1e-9);
        assert!((out.total - u.norm_squared()).abs() < 1e-9 * u.norm_squared());
        assert!((out.split_sum - out.total).abs() < 1e-9 * out.total);
    }

    #[test]
    fn ando_split_is_pythagorean_and_minimal() {
        let mut rng = trial_rng(9, "split-min", 0);
        for trial in 0..30 {
            let dim = 3 + trial % 3;
            let t1 = gaussian_matrix::<f64, _>(&mut rng, dim, 2) * gaussian_matrix::<f64, _>(&mut rng, 2, dim);
            let t2 = gaussian_matrix::<f64, _>(&mut rng, dim, 2) * gaussian_matrix::<f64, _>(&mut rng, 2, dim);
            let gram = &t1 * t1.transpose() + &t2 * t2.transpose();
            let t = linalg::hermitian_sqrt_psd(&gram, TOL);
            let x = gaussian_vector::<f64, _>(&mut rng, dim);
            let u = &t * x;
            let out = ando_split(&t1, &t2, &u, TOL).unwrap();
            assert!(
                (out.total - out.split_sum).abs() < 1e-8 * out.total.max(1.0),
                "pythagoras failed at trial {trial}"
            );
            // normal-equation oracle: the minimum of ‖s₁‖² + ‖s₂‖² over
            // u = T₁s₁ + T₂s₂ equals ‖[T₁ T₂]† u‖²
            let mut row = DMatrix::<f64>::zeros(dim, 2 * dim);
            row.view_mut((0, 0), (dim, dim)).copy_from(&t1);
            row.view_mut((0, dim), (dim, dim)).copy_from(&t2);
            let s = linalg::pinv(&row, TOL) * &u;
            let oracle = s.norm_squared();
            assert!(
                (out.split_sum - oracle).abs() < 1e-8 * oracle.max(1.0),
                "minimality oracle failed at trial {trial}"
            );
            // perturbing inside the admissible set strictly increases the sum
            let ker = linalg::nullspace_basis(&row, TOL);
            if ker.ncols() > 0 {
                let delta = &ker * gaussian_vector::<f64, _>(&mut rng, ker.ncols());
                if delta.norm() > 1e-6 {
                    let s_perturbed = &s + &delta;
                    assert!(s_perturbed.norm_squared() > oracle + delta.norm_squared() * 0.999);
                }
            }
        }
    }

    #[test]
    fn debranges_cases() {
        let t = diag::<f64>(&[1.0, 0.0]);
        let out = debranges(&t, TOL).unwrap();
        assert_eq!(out.space.dim(), 1);
        assert_eq!(out.complement_space.dim(), 1);
        assert!(out.overlap.is_zero());
        assert!(out.relation.rel_eq(&LinearRelation::graph_of(&diag::<f64>(&[1.0, 0.0]), TOL)));
        assert!((out.op_norm - 1.0).abs() < 1e-9);
        assert!(out.norm_bound_ok);

        let out = debranges(&DMatrix::<f64>::zeros(2, 2), TOL).unwrap();
        assert!(out.space.is_zero());
        assert!(out.complement_space.is_full());
        assert_eq!(out.op_norm, 0.0);

        // non-contractions are rejected
        assert!(matches!(debranges(&diag::<f64>(&[2.0, 0.0]), TOL), Err(Error::Precondition(_))));
    }

    #[test]
    fn debranges_random_contractions_are_bounded() {
        let mut rng = trial_rng(10, "debranges", 0);
        for trial in 0..40 {
            let dim = 2 + trial % 4;
            let g = gaussian_matrix::<f64, _>(&mut rng, dim, dim);
            let t = &g / (1.01 * linalg::spectral_norm(&g));
            let out = debranges(&t, TOL).unwrap();
            assert!(out.norm_bound_ok, "bound failed at trial {trial}: {}", out.op_norm);
            assert!(out.space.sum(&out.complement_space).unwrap().is_full());
        }
        // isometry-like: σ_max exactly 1 forces norm 1
        for trial in 0..10 {
            let dim = 2 + trial % 3;
            let g = gaussian_matrix::<f64, _>(&mut rng, dim, dim);
            let t = &g / linalg::spectral_norm(&g);
            let out = debranges(&t, TOL).unwrap();
            assert!(out.op_norm >= 1.0 - 1e-6 && out.op_norm <= 1.0 + 1e-9, "trial {trial}");
        }
    }
}

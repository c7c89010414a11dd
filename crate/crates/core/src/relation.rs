//! Linear relations as subspaces of a product space.
//!
//! A relation `T` from `K^n` to `K^m` is any subspace of `K^n × K^m`, stored
//! here as an orthonormal graph basis whose first `n` coordinates are the
//! input block and last `m` the output block. The calculus follows the usual
//! conventions: `T⁻¹` swaps the blocks, `T*` is the orthogonal complement of
//! the flipped graph, `T + S` matches inputs, `RT` matches the middle
//! coordinate, and `T +̂ S` is the plain subspace sum of graphs.
//!
//! Every relation decomposes as `dim graph = dim dom + dim mul = dim ran +
//! dim ker`; `T` is (the graph of) an operator exactly when `mul T = {0}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::subspace::{SetOrder, Subspace};

/// A linear relation `T ⊆ K^dim_in × K^dim_out`.
#[derive(Debug, Clone)]
pub struct LinearRelation<S: Scalar> {
    dim_in: usize,
    dim_out: usize,
    graph: Subspace<S>,
}

/// The four distinguished subspaces of a relation, plus the operator flag.
#[derive(Debug, Clone)]
pub struct RelationParts<S: Scalar> {
    pub dom: Subspace<S>,
    pub ran: Subspace<S>,
    pub ker: Subspace<S>,
    pub mul: Subspace<S>,
    pub is_operator: bool,
}

/// The image `Tx` of a single vector: either empty (when `x ∉ dom T`) or an
/// affine set `point + directions` with `point` the minimum-norm element.
#[derive(Debug, Clone)]
pub enum AffineSet<S: Scalar> {
    Empty,
    Set { point: DVector<S>, directions: Subspace<S> },
}

impl<S: Scalar> AffineSet<S> {
    pub fn is_empty(&self) -> bool {
        matches!(self, AffineSet::Empty)
    }

    pub fn point(&self) -> Option<&DVector<S>> {
        match self {
            AffineSet::Empty => None,
            AffineSet::Set { point, .. } => Some(point),
        }
    }

    pub fn directions(&self) -> Option<&Subspace<S>> {
        match self {
            AffineSet::Empty => None,
            AffineSet::Set { directions, .. } => Some(directions),
        }
    }

    /// Whether `v` lies in the set, at tolerance relative to the set's scale.
    pub fn contains_vector(&self, v: &DVector<S>, tol: f64) -> bool {
        match self {
            AffineSet::Empty => false,
            AffineSet::Set { point, directions } => {
                let diff = v - point;
                let scale = v.norm().max(point.norm()).max(1.0);
                (&diff - directions.project_vector(&diff)).norm() <= tol * scale
            }
        }
    }

    /// Set equality: same directions and the points differ inside them.
    pub fn set_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (AffineSet::Empty, AffineSet::Empty) => true,
            (
                AffineSet::Set { point: p, directions: d },
                AffineSet::Set { point: q, directions: e },
            ) => d.equals(e) && {
                let diff = p - q;
                let scale = p.norm().max(q.norm()).max(1.0);
                (&diff - d.project_vector(&diff)).norm() <= tol * scale
            },
            _ => false,
        }
    }
}

impl<S: Scalar> LinearRelation<S> {
    /// Wrap a subspace of the product space as a relation.
    pub fn from_graph(dim_in: usize, dim_out: usize, graph: Subspace<S>) -> Result<Self> {
        if graph.ambient_dim() != dim_in + dim_out {
            return Err(Error::dim(format!(
                "graph ambient {} does not match {} + {}",
                graph.ambient_dim(),
                dim_in,
                dim_out
            )));
        }
        Ok(LinearRelation { dim_in, dim_out, graph })
    }

    /// Span of the concatenated pairs `(x, y)`. An empty list gives the zero
    /// relation `{(0, 0)}`.
    pub fn from_generators(
        pairs: &[(DVector<S>, DVector<S>)],
        dim_in: usize,
        dim_out: usize,
        tol: f64,
    ) -> Result<Self> {
        let mut g = DMatrix::zeros(dim_in + dim_out, pairs.len());
        for (j, (x, y)) in pairs.iter().enumerate() {
            if x.len() != dim_in || y.len() != dim_out {
                return Err(Error::dim(format!(
                    "generator {j} has shape ({}, {}), expected ({dim_in}, {dim_out})",
                    x.len(),
                    y.len()
                )));
            }
            for i in 0..dim_in {
                g[(i, j)] = x[i];
            }
            for i in 0..dim_out {
                g[(dim_in + i, j)] = y[i];
            }
        }
        Ok(LinearRelation { dim_in, dim_out, graph: Subspace::from_generators(&g, tol) })
    }

    /// The graph `{(x, Ax)}` of a matrix.
    pub fn graph_of(a: &DMatrix<S>, tol: f64) -> Self {
        let (m, n) = a.shape();
        let mut g = DMatrix::zeros(n + m, n);
        g.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
        g.view_mut((n, 0), (m, n)).copy_from(a);
        LinearRelation { dim_in: n, dim_out: m, graph: Subspace::from_generators(&g, tol) }
    }

    /// `I_M = {(u, u) : u ∈ M}` on the ambient space of `m`.
    pub fn identity_on(m: &Subspace<S>) -> Self {
        let n = m.ambient_dim();
        let mut g = DMatrix::zeros(2 * n, m.dim());
        g.view_mut((0, 0), (n, m.dim())).copy_from(m.basis());
        g.view_mut((n, 0), (n, m.dim())).copy_from(m.basis());
        LinearRelation {
            dim_in: n,
            dim_out: n,
            graph: Subspace::from_generators(&g, m.tol()),
        }
    }

    /// `0_M = M × {0}`.
    pub fn zero_on(m: &Subspace<S>) -> Self {
        let n = m.ambient_dim();
        let mut g = DMatrix::zeros(2 * n, m.dim());
        g.view_mut((0, 0), (n, m.dim())).copy_from(m.basis());
        LinearRelation {
            dim_in: n,
            dim_out: n,
            graph: Subspace::from_generators(&g, m.tol()),
        }
    }

    /// The full product relation `M × N`.
    pub fn product_of(m: &Subspace<S>, n: &Subspace<S>) -> Result<Self> {
        if m.ambient_dim() != n.ambient_dim() {
            return Err(Error::dim("product relation needs one ambient space"));
        }
        let dim = m.ambient_dim();
        let tol = m.tol().max(n.tol());
        let mut g = DMatrix::zeros(2 * dim, m.dim() + n.dim());
        g.view_mut((0, 0), (dim, m.dim())).copy_from(m.basis());
        g.view_mut((dim, m.dim()), (dim, n.dim())).copy_from(n.basis());
        Ok(LinearRelation { dim_in: dim, dim_out: dim, graph: Subspace::from_generators(&g, tol) })
    }

    /// The zero relation `{(0, 0)}`.
    pub fn zero_relation(dim_in: usize, dim_out: usize, tol: f64) -> Self {
        LinearRelation { dim_in, dim_out, graph: Subspace::zero(dim_in + dim_out, tol) }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn graph(&self) -> &Subspace<S> {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn tol(&self) -> f64 {
        self.graph.tol()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// Input block of the orthonormal graph basis (`dim_in × r`).
    fn input_block(&self) -> DMatrix<S> {
        self.graph.basis().rows(0, self.dim_in).into_owned()
    }

    /// Output block of the orthonormal graph basis (`dim_out × r`).
    fn output_block(&self) -> DMatrix<S> {
        self.graph.basis().rows(self.dim_in, self.dim_out).into_owned()
    }

    /// Domain, range, kernel and multivalued part.
    ///
    /// `dom`/`ran` are the spans of the graph-basis blocks; `mul` is the
    /// output block of `graph ∩ ({0} × K)`, read off the kernel of the input
    /// block, and `ker` symmetrically. The blocks come from an orthonormal
    /// basis, so every rank cutoff is anchored at scale 1.
    pub fn parts(&self) -> RelationParts<S> {
        let tol = self.tol();
        let b_in = self.input_block();
        let b_out = self.output_block();
        let dom = Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&b_in, tol), tol);
        let ran = Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&b_out, tol), tol);
        let mul_gen = &b_out * linalg::nullspace_basis_cutoff(&b_in, tol);
        let mul = Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&mul_gen, tol), tol);
        let ker_gen = &b_in * linalg::nullspace_basis_cutoff(&b_out, tol);
        let ker = Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&ker_gen, tol), tol);
        let is_operator = mul.is_zero();
        RelationParts { dom, ran, ker, mul, is_operator }
    }

    pub fn dom(&self) -> Subspace<S> {
        let tol = self.tol();
        Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&self.input_block(), tol), tol)
    }

    pub fn ran(&self) -> Subspace<S> {
        let tol = self.tol();
        Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&self.output_block(), tol), tol)
    }

    pub fn mul_part(&self) -> Subspace<S> {
        let tol = self.tol();
        let gen = self.output_block() * linalg::nullspace_basis_cutoff(&self.input_block(), tol);
        Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&gen, tol), tol)
    }

    pub fn ker(&self) -> Subspace<S> {
        let tol = self.tol();
        let gen = self.input_block() * linalg::nullspace_basis_cutoff(&self.output_block(), tol);
        Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&gen, tol), tol)
    }

    pub fn is_operator(&self) -> bool {
        self.mul_part().is_zero()
    }

    /// `T⁻¹ = {(y, x) : (x, y) ∈ T}`: a block swap of the graph basis, no
    /// arithmetic involved.
    pub fn inverse(&self) -> Self {
        let r = self.graph_dim();
        let mut basis = DMatrix::zeros(self.dim_in + self.dim_out, r);
        basis
            .view_mut((0, 0), (self.dim_out, r))
            .copy_from(&self.graph.basis().rows(self.dim_in, self.dim_out));
        basis
            .view_mut((self.dim_out, 0), (self.dim_in, r))
            .copy_from(&self.graph.basis().rows(0, self.dim_in));
        LinearRelation {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            graph: Subspace::from_orthonormal(basis, self.tol()),
        }
    }

    /// Adjoint `T* = {(x, y) : ⟨g, x⟩ = ⟨f, y⟩ for all (f, g) ∈ T}`, computed
    /// as the orthogonal complement of the flipped graph `{(g, −f)}`. The
    /// flip is unitary, so the complement needs no rank decision.
    pub fn adjoint(&self) -> Self {
        let r = self.graph_dim();
        let mut flipped = DMatrix::zeros(self.dim_in + self.dim_out, r);
        flipped
            .view_mut((0, 0), (self.dim_out, r))
            .copy_from(&self.graph.basis().rows(self.dim_in, self.dim_out));
        let neg_in = self.graph.basis().rows(0, self.dim_in) * S::from_real(-1.0);
        flipped.view_mut((self.dim_out, 0), (self.dim_in, r)).copy_from(&neg_in);
        let basis = linalg::complement_of_orthonormal(&flipped);
        LinearRelation {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            graph: Subspace::from_orthonormal(basis, self.tol()),
        }
    }

    /// Closure of the graph: the identity in finite dimensions, kept as a
    /// named operation for parity with the general theory.
    pub fn closure(&self) -> Self {
        self.clone()
    }

    /// Componentwise sum `T +̂ S` (sum of graphs), with flags telling whether
    /// the sum is direct and whether the graphs are orthogonal.
    pub fn cw_sum(&self, other: &Self) -> Result<CwSum<S>> {
        self.check_same_dims(other)?;
        let graph = self.graph.sum(&other.graph)?;
        let direct = graph.dim() == self.graph_dim() + other.graph_dim();
        let cross = self.graph.basis().adjoint() * other.graph.basis();
        let orthogonal = linalg::spectral_norm(&cross) <= self.tol().max(other.tol());
        Ok(CwSum {
            relation: LinearRelation { dim_in: self.dim_in, dim_out: self.dim_out, graph },
            direct,
            orthogonal,
        })
    }

    /// Operator-style sum `T + S = {(x, y + z) : (x, y) ∈ T, (x, z) ∈ S}`.
    pub fn op_sum(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        let tol = self.tol().max(other.tol());
        let (rt, rs) = (self.graph_dim(), other.graph_dim());
        let mut constraint = DMatrix::zeros(self.dim_in, rt + rs);
        constraint.view_mut((0, 0), (self.dim_in, rt)).copy_from(&self.input_block());
        constraint
            .view_mut((0, rt), (self.dim_in, rs))
            .copy_from(&(other.input_block() * S::from_real(-1.0)));
        let matched = linalg::nullspace_basis_cutoff(&constraint, tol);
        let mut stack = DMatrix::zeros(self.dim_in + self.dim_out, rt + rs);
        stack.view_mut((0, 0), (self.dim_in, rt)).copy_from(&self.input_block());
        stack.view_mut((self.dim_in, 0), (self.dim_out, rt)).copy_from(&self.output_block());
        stack.view_mut((self.dim_in, rt), (self.dim_out, rs)).copy_from(&other.output_block());
        let graph = Subspace::from_orthonormal(
            linalg::orthonormal_range_cutoff(&(stack * matched), tol),
            tol,
        );
        Ok(LinearRelation { dim_in: self.dim_in, dim_out: self.dim_out, graph })
    }

    /// Product `self ∘ inner`: `(RT)x = R(Tx)`, so `inner` acts first. The
    /// graphs are matched on the middle coordinate and the middle block is
    /// projected out, which keeps the computation rank-stable.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.dim_out != self.dim_in {
            return Err(Error::dim(format!(
                "compose: inner produces {}, outer consumes {}",
                inner.dim_out, self.dim_in
            )));
        }
        let tol = self.tol().max(inner.tol());
        let (rt, rr) = (inner.graph_dim(), self.graph_dim());
        let mid = self.dim_in;
        let mut constraint = DMatrix::zeros(mid, rt + rr);
        constraint.view_mut((0, 0), (mid, rt)).copy_from(&inner.output_block());
        constraint
            .view_mut((0, rt), (mid, rr))
            .copy_from(&(self.input_block() * S::from_real(-1.0)));
        let matched = linalg::nullspace_basis_cutoff(&constraint, tol);
        let mut stack = DMatrix::zeros(inner.dim_in + self.dim_out, rt + rr);
        stack.view_mut((0, 0), (inner.dim_in, rt)).copy_from(&inner.input_block());
        stack.view_mut((inner.dim_in, rt), (self.dim_out, rr)).copy_from(&self.output_block());
        let graph = Subspace::from_orthonormal(
            linalg::orthonormal_range_cutoff(&(stack * matched), tol),
            tol,
        );
        Ok(LinearRelation { dim_in: inner.dim_in, dim_out: self.dim_out, graph })
    }

    /// `Tx` as an affine set; empty exactly when `x ∉ dom T`.
    pub fn apply(&self, x: &DVector<S>) -> Result<AffineSet<S>> {
        if x.len() != self.dim_in {
            return Err(Error::dim(format!(
                "vector length {} does not match input dimension {}",
                x.len(),
                self.dim_in
            )));
        }
        let tol = self.tol();
        let b_in = self.input_block();
        let coeff = linalg::pinv_cutoff(&b_in, tol) * x;
        let residual = (&b_in * &coeff - x).norm();
        if residual > tol * x.norm().max(1.0) {
            return Ok(AffineSet::Empty);
        }
        let y0 = self.output_block() * coeff;
        let mul = self.mul_part();
        let point = &y0 - mul.project_vector(&y0);
        Ok(AffineSet::Set { point, directions: mul })
    }

    /// Image `T(M) = {y : (x, y) ∈ T, x ∈ M}`.
    pub fn image(&self, m: &Subspace<S>) -> Result<Subspace<S>> {
        if m.ambient_dim() != self.dim_in {
            return Err(Error::dim("image: subspace lives in the wrong space"));
        }
        let tol = self.tol().max(m.tol());
        let constrained = self.input_block() - m.projector() * self.input_block();
        let matched = linalg::nullspace_basis_cutoff(&constrained, tol);
        let gen = self.output_block() * matched;
        Ok(Subspace::from_orthonormal(linalg::orthonormal_range_cutoff(&gen, tol), tol))
    }

    /// Restriction `T|_M = T ∩ (M × K)`.
    pub fn restrict(&self, m: &Subspace<S>) -> Result<Self> {
        if m.ambient_dim() != self.dim_in {
            return Err(Error::dim("restrict: subspace lives in the wrong space"));
        }
        let tol = self.tol().max(m.tol());
        let constrained = self.input_block() - m.projector() * self.input_block();
        let matched = linalg::nullspace_basis_cutoff(&constrained, tol);
        let graph = Subspace::from_orthonormal(
            linalg::orthonormal_range_cutoff(&(self.graph.basis() * matched), tol),
            tol,
        );
        Ok(LinearRelation { dim_in: self.dim_in, dim_out: self.dim_out, graph })
    }

    /// Graph-level set comparison.
    pub fn compare(&self, other: &Self) -> Result<SetOrder> {
        self.check_same_dims(other)?;
        self.graph.compare(&other.graph)
    }

    pub fn rel_eq(&self, other: &Self) -> bool {
        matches!(self.compare(other), Ok(SetOrder::Equal))
    }

    /// Equality through the criterion `S = T ⟺ S ⊆ T, dom T ⊆ dom S and
    /// mul T ⊆ mul S` — an independent route from the graph comparison.
    pub fn rel_eq_by_parts_criterion(&self, other: &Self) -> Result<bool> {
        self.check_same_dims(other)?;
        Ok(other.graph.contains(&self.graph)
            && self.dom().contains(&other.dom())
            && self.mul_part().contains(&other.mul_part()))
    }

    /// `‖P_graph(T) − P_graph(S)‖₂`.
    pub fn graph_distance(&self, other: &Self) -> f64 {
        self.graph.distance(&other.graph)
    }

    /// The weak Lebesgue operator term as a matrix: `B x` is the unique `y`
    /// with `(x, y) ∈ QT` for `x ∈ dom T` (`Q = P_{(mul T)⊥}`) and `B x = 0`
    /// for `x ⊥ dom T`, together with `‖B‖`. `T` is continuous exactly when
    /// this norm is finite in the infinite-dimensional reading, so the norm
    /// doubles as the continuity functional.
    pub fn operator_part_matrix(&self) -> (DMatrix<S>, f64) {
        let tol = self.tol();
        let mul = self.mul_part();
        let q = DMatrix::identity(self.dim_out, self.dim_out) - mul.projector();
        let b = q * self.output_block() * linalg::pinv_cutoff(&self.input_block(), tol);
        let norm = linalg::spectral_norm(&b);
        (b, norm)
    }

    /// Matrix of a relation that is (the graph of) an operator; the matrix
    /// acts as zero on `(dom T)⊥` when the domain is not everything.
    pub fn operator_matrix(&self) -> Result<DMatrix<S>> {
        if !self.is_operator() {
            return Err(Error::pre("relation is multivalued, not an operator"));
        }
        Ok(self.operator_part_matrix().0)
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::dim(format!(
                "relation shapes differ: {}→{} vs {}→{}",
                self.dim_in, self.dim_out, other.dim_in, other.dim_out
            )));
        }
        Ok(())
    }
}

/// Result of a componentwise sum.
#[derive(Debug, Clone)]
pub struct CwSum<S: Scalar> {
    pub relation: LinearRelation<S>,
    pub direct: bool,
    pub orthogonal: bool,
}

/// Moore–Penrose inverse through the relation formula
/// `A† = P_{(ker A)⊥} A⁻¹ P_{(ker A*)⊥}`: the composition is asserted to be
/// an everywhere-defined operator graph and its matrix is returned.
pub fn relation_pinv<S: Scalar>(a: &DMatrix<S>, tol: f64) -> Result<DMatrix<S>> {
    let graph = LinearRelation::graph_of(a, tol);
    let ker = graph.ker();
    let ker_star = LinearRelation::graph_of(&a.adjoint(), tol).ker();
    let left = LinearRelation::graph_of(&ker.complement().projector(), tol);
    let right = LinearRelation::graph_of(&ker_star.complement().projector(), tol);
    let composed = left.compose(&graph.inverse().compose(&right)?)?;
    if !composed.is_operator() {
        return Err(Error::Inconsistent(
            "pseudo-inverse composition has a nontrivial multivalued part".into(),
        ));
    }
    if !composed.dom().is_full() {
        return Err(Error::Inconsistent(
            "pseudo-inverse composition is not everywhere defined".into(),
        ));
    }
    Ok(composed.operator_part_matrix().0)
}

//! Exact-tolerance subspace arithmetic: spans, lattice operations (sum,
//! intersection, orthogonal complement, `M ⊖ N = M ∩ N⊥`), orthogonal
//! projectors, containment tests by principal angles, and the Friedrichs
//! cosine `c(M,N)`.
//!
//! A subspace is stored as an orthonormal basis (left singular vectors of a
//! generator matrix) together with the relative rank tolerance that produced
//! it. Bases are never compared entry-wise; equality and containment are
//! decided through projectors, since orthonormal bases are not unique.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::gaussian_matrix;
use crate::scalar::Scalar;

/// Outcome of comparing two subspaces as sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOrder {
    Equal,
    StrictSubset,
    StrictSuperset,
    Incomparable,
}

/// A linear subspace of `K^n`, held as an orthonormal basis with a relative
/// rank tolerance. `dim = 0` encodes the zero subspace `{0}`.
#[derive(Debug, Clone)]
pub struct Subspace<S: Scalar> {
    ambient: usize,
    basis: DMatrix<S>,
    tol: f64,
}

/// Default relative rank tolerance for an `m × n` problem.
pub fn default_tol(m: usize, n: usize) -> f64 {
    m.max(n).max(1) as f64 * f64::EPSILON
}

impl<S: Scalar> Subspace<S> {
    /// Orthonormalized span of the columns of `generators`; numerical rank is
    /// decided by `σ_i ≥ tol · σ_max`.
    pub fn from_generators(generators: &DMatrix<S>, tol: f64) -> Self {
        let basis = linalg::orthonormal_range(generators, tol);
        Subspace { ambient: generators.nrows(), basis, tol }
    }

    /// Span of a list of ambient vectors. An empty list spans `{0}`.
    pub fn span(vectors: &[DVector<S>], ambient: usize, tol: f64) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient {
                return Err(Error::dim(format!(
                    "generator {i} has length {}, ambient is {ambient}",
                    v.len()
                )));
            }
        }
        let mut g = DMatrix::zeros(ambient, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            g.set_column(j, v);
        }
        Ok(Self::from_generators(&g, tol))
    }

    /// The zero subspace `{0}`.
    pub fn zero(ambient: usize, tol: f64) -> Self {
        Subspace { ambient, basis: DMatrix::zeros(ambient, 0), tol }
    }

    /// The full space `K^n`.
    pub fn full(ambient: usize, tol: f64) -> Self {
        Subspace { ambient, basis: DMatrix::identity(ambient, ambient), tol }
    }

    /// Wrap a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<S>, tol: f64) -> Self {
        debug_assert!(
            (basis.adjoint() * &basis - DMatrix::identity(basis.ncols(), basis.ncols())).norm()
                < 1e-10,
            "columns are not orthonormal"
        );
        Subspace { ambient: basis.nrows(), basis, tol }
    }

    /// Span of `dim` i.i.d. standard Gaussian vectors; deterministic per rng state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, ambient: usize, dim: usize, tol: f64) -> Result<Self> {
        if dim > ambient {
            return Err(Error::dim(format!("dim {dim} exceeds ambient {ambient}")));
        }
        let g = gaussian_matrix::<S, R>(rng, ambient, dim);
        Ok(Self::from_generators(&g, tol))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn basis(&self) -> &DMatrix<S> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    fn check_ambient(&self, other: &Self) -> Result<f64> {
        if self.ambient != other.ambient {
            return Err(Error::dim(format!(
                "ambient dimensions differ: {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(self.tol.max(other.tol))
    }

    /// Subspace sum `M + N`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        let tol = self.check_ambient(other)?;
        let mut g = DMatrix::zeros(self.ambient, self.dim() + other.dim());
        g.view_mut((0, 0), (self.ambient, self.dim())).copy_from(&self.basis);
        g.view_mut((0, self.dim()), (self.ambient, other.dim())).copy_from(&other.basis);
        Ok(Self::from_generators(&g, tol))
    }

    /// Intersection `M ∩ N`, computed as `(M⊥ + N⊥)⊥`.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        Ok(self.complement().sum(&other.complement())?.complement())
    }

    /// Orthogonal complement `M⊥`.
    pub fn complement(&self) -> Self {
        let basis = linalg::complement_of_orthonormal(&self.basis);
        Subspace { ambient: self.ambient, basis, tol: self.tol }
    }

    /// `M ⊖ N := M ∩ N⊥`. Total in the arguments; callers enforce `N ⊆ M`
    /// where a theorem requires it.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.intersect(&other.complement())
    }

    /// Orthogonal projector `P_M = B B*`.
    pub fn projector(&self) -> DMatrix<S> {
        &self.basis * self.basis.adjoint()
    }

    /// `P_M v`.
    pub fn project_vector(&self, v: &DVector<S>) -> DVector<S> {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// Whether `v ∈ M` up to `tol · ‖v‖`.
    pub fn contains_vector(&self, v: &DVector<S>) -> bool {
        let norm = v.norm();
        if norm == 0.0 {
            return true;
        }
        (v - self.project_vector(v)).norm() <= self.tol * norm
    }

    /// Whether `other ⊆ self`, decided by `‖(I − P_self) · basis_other‖ ≤ tol`.
    pub fn contains(&self, other: &Self) -> bool {
        if other.dim() == 0 {
            return true;
        }
        if other.dim() > self.dim() {
            return false;
        }
        let tol = self.tol.max(other.tol);
        let residual = &other.basis - &self.basis * (self.basis.adjoint() * &other.basis);
        linalg::spectral_norm(&residual) <= tol
    }

    /// Set comparison driven by the two containment tests.
    pub fn compare(&self, other: &Self) -> Result<SetOrder> {
        self.check_ambient(other)?;
        let fwd = other.contains(self);
        let bwd = self.contains(other);
        Ok(match (bwd, fwd) {
            (true, true) => SetOrder::Equal,
            (false, true) => SetOrder::StrictSubset,
            (true, false) => SetOrder::StrictSuperset,
            (false, false) => SetOrder::Incomparable,
        })
    }

    pub fn equals(&self, other: &Self) -> bool {
        matches!(self.compare(other), Ok(SetOrder::Equal))
    }

    /// Projector distance `‖P_M − P_N‖₂`.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::op_distance(&self.projector(), &other.projector())
    }

    /// Friedrichs cosine
    /// `c(M,N) = sup{ |⟨x,y⟩| : x ∈ M⊖(M∩N), y ∈ N⊖(M∩N), ‖x‖,‖y‖ ≤ 1 }`,
    /// evaluated as the largest singular value of `B_{M'}* B_{N'}` after the
    /// common part is removed. Always `< 1` in finite dimensions.
    pub fn friedrichs_cosine(&self, other: &Self) -> Result<f64> {
        self.check_ambient(other)?;
        let common = self.intersect(other)?;
        let m_red = self.minus(&common)?;
        let n_red = other.minus(&common)?;
        if m_red.is_zero() || n_red.is_zero() {
            return Ok(0.0);
        }
        let overlap = m_red.basis.adjoint() * &n_red.basis;
        Ok(linalg::spectral_norm(&overlap).clamp(0.0, 1.0))
    }

    /// Image `span(A · basis)` under a matrix with matching column count. The
    /// rank cutoff is anchored to `‖A‖`, since `A` may nearly annihilate `M`.
    pub fn image_under(&self, a: &DMatrix<S>) -> Result<Self> {
        if a.ncols() != self.ambient {
            return Err(Error::dim(format!(
                "matrix has {} columns, ambient is {}",
                a.ncols(),
                self.ambient
            )));
        }
        let cutoff = self.tol * linalg::spectral_norm(a);
        Ok(Subspace {
            ambient: a.nrows(),
            basis: linalg::orthonormal_range_cutoff(&(a * &self.basis), cutoff),
            tol: self.tol,
        })
    }

    /// Preimage `{x : A x ∈ M} = ker((I − P_M) A)`, anchored to `‖A‖`.
    pub fn preimage_under(&self, a: &DMatrix<S>) -> Result<Self> {
        if a.nrows() != self.ambient {
            return Err(Error::dim(format!(
                "matrix has {} rows, ambient is {}",
                a.nrows(),
                self.ambient
            )));
        }
        let residual = a - self.projector() * a;
        let cutoff = self.tol * linalg::spectral_norm(a);
        Ok(Subspace {
            ambient: a.ncols(),
            basis: linalg::nullspace_basis_cutoff(&residual, cutoff),
            tol: self.tol,
        })
    }
}

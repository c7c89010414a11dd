//! Finite-dimensional calculus of linear relations and multivalued projections.
//!
//! A linear relation from `K^n` to `K^m` (`K` real or complex) is any subspace of the
//! product space `K^n × K^m`; operators are the relations whose multivalued part is
//! trivial. This crate implements subspace arithmetic, the relation calculus (inverse,
//! adjoint, sums, products, Moore–Penrose inverse), multivalued projections
//! `P_{M,N} = I_M +̂ (N × {0})` together with the Greville and Pták formulas, Lebesgue-type
//! decompositions, operator-range (semiclosed) structure through the factor
//! `Γ = (AA* + BB*)^{1/2}`, de Branges–Rovnyak complements, and a weighted least-squares
//! solver that accepts singular positive-semidefinite weights.
//!
//! Everything is double precision; scalars are `f64` or `Complex<f64>` through the
//! [`Scalar`] trait. All values are immutable after construction and all operations are
//! pure, so they can be shared freely across threads.

pub mod decomposition;
pub mod error;
pub mod io;
pub mod linalg;
pub mod projection;
pub mod relation;
pub mod rng;
pub mod scalar;
pub mod semiclosed;
pub mod subspace;
pub mod verify;
pub mod wlss;

pub use error::{Error, Result};
pub use relation::{AffineSet, CwSum, LinearRelation, RelationParts};
pub use scalar::{Scalar, ScalarKind};
pub use subspace::{SetOrder, Subspace};

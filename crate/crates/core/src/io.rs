//! JSON formats for subspaces, relations, matrices, vectors and
//! least-squares problems.
//!
//! Real entries are plain numbers; complex entries are `[re, im]` pairs.
//! Subspace and relation generators are rows (one generator per row), and
//! orthonormalization happens on load, so any spanning set round-trips to
//! the same subspace.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{AffineSet, LinearRelation};
use crate::scalar::{Scalar, ScalarKind};
use crate::subspace::Subspace;

/// One scalar entry: a number, or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

impl EntryJson {
    fn decode<S: Scalar>(self) -> Result<S> {
        let (re, im) = match self {
            EntryJson::Real(re) => (re, 0.0),
            EntryJson::Complex([re, im]) => (re, im),
        };
        S::from_re_im(re, im)
            .ok_or_else(|| Error::Parse(format!("complex entry [{re}, {im}] in a real payload")))
    }

    fn encode<S: Scalar>(value: S) -> Self {
        let (re, im) = value.re_im();
        match S::KIND {
            ScalarKind::Real => EntryJson::Real(re),
            ScalarKind::Complex => EntryJson::Complex([re, im]),
        }
    }
}

fn decode_rows_checked<S: Scalar>(rows: &[Vec<EntryJson>], width: usize) -> Result<DMatrix<S>> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {width}",
                row.len()
            )));
        }
        for entry in row {
            entry.decode::<S>()?;
        }
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| {
        rows[i][j].decode().expect("validated above")
    }))
}

pub fn encode_matrix_rows<S: Scalar>(m: &DMatrix<S>) -> Vec<Vec<EntryJson>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| EntryJson::encode(m[(i, j)])).collect())
        .collect()
}

pub fn decode_vector<S: Scalar>(entries: &[EntryJson]) -> Result<DVector<S>> {
    let mut out = DVector::zeros(entries.len());
    for (i, e) in entries.iter().enumerate() {
        out[i] = e.decode::<S>()?;
    }
    Ok(out)
}

pub fn encode_vector<S: Scalar>(v: &DVector<S>) -> Vec<EntryJson> {
    v.iter().map(|&x| EntryJson::encode(x)).collect()
}

/// `{"ambient": n, "scalar": "real"|"complex", "generators": [[…], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub ambient: usize,
    pub scalar: ScalarKind,
    pub generators: Vec<Vec<EntryJson>>,
}

impl SubspaceJson {
    pub fn to_subspace<S: Scalar>(&self, tol: f64) -> Result<Subspace<S>> {
        if S::KIND != self.scalar {
            return Err(Error::Parse(format!(
                "payload is {}, expected {}",
                self.scalar,
                S::KIND
            )));
        }
        let rows = decode_rows_checked::<S>(&self.generators, self.ambient)?;
        // generators are rows; the subspace wants them as columns
        Ok(Subspace::from_generators(&rows.transpose(), tol))
    }

    pub fn from_subspace<S: Scalar>(s: &Subspace<S>) -> Self {
        SubspaceJson {
            ambient: s.ambient_dim(),
            scalar: S::KIND,
            generators: encode_matrix_rows(&s.basis().transpose()),
        }
    }
}

/// `{"dim_in": n, "dim_out": m, "scalar": …, "generators": [[x…, y…], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub scalar: ScalarKind,
    pub generators: Vec<Vec<EntryJson>>,
}

impl RelationJson {
    pub fn to_relation<S: Scalar>(&self, tol: f64) -> Result<LinearRelation<S>> {
        if S::KIND != self.scalar {
            return Err(Error::Parse(format!(
                "payload is {}, expected {}",
                self.scalar,
                S::KIND
            )));
        }
        let rows = decode_rows_checked::<S>(&self.generators, self.dim_in + self.dim_out)?;
        LinearRelation::from_graph(
            self.dim_in,
            self.dim_out,
            Subspace::from_generators(&rows.transpose(), tol),
        )
    }

    pub fn from_relation<S: Scalar>(t: &LinearRelation<S>) -> Self {
        RelationJson {
            dim_in: t.dim_in(),
            dim_out: t.dim_out(),
            scalar: S::KIND,
            generators: encode_matrix_rows(&t.graph().basis().transpose()),
        }
    }
}

/// `{"scalar": …, "rows": [[…], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub scalar: ScalarKind,
    pub rows: Vec<Vec<EntryJson>>,
}

impl MatrixJson {
    pub fn to_matrix<S: Scalar>(&self) -> Result<DMatrix<S>> {
        if S::KIND != self.scalar {
            return Err(Error::Parse(format!(
                "payload is {}, expected {}",
                self.scalar,
                S::KIND
            )));
        }
        let width = self.rows.first().map(|r| r.len()).unwrap_or(0);
        decode_rows_checked::<S>(&self.rows, width)
    }

    pub fn from_matrix<S: Scalar>(m: &DMatrix<S>) -> Self {
        MatrixJson { scalar: S::KIND, rows: encode_matrix_rows(m) }
    }
}

/// `{"scalar": …, "entries": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub scalar: ScalarKind,
    pub entries: Vec<EntryJson>,
}

impl VectorJson {
    pub fn to_vector<S: Scalar>(&self) -> Result<DVector<S>> {
        if S::KIND != self.scalar {
            return Err(Error::Parse(format!(
                "payload is {}, expected {}",
                self.scalar,
                S::KIND
            )));
        }
        decode_vector::<S>(&self.entries)
    }

    pub fn from_vector<S: Scalar>(v: &DVector<S>) -> Self {
        VectorJson { scalar: S::KIND, entries: encode_vector(v) }
    }
}

/// `{"scalar": …, "W": [[…]], "A": [[…]], "b": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WlssProblemJson {
    pub scalar: ScalarKind,
    #[serde(rename = "W")]
    pub w: Vec<Vec<EntryJson>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<EntryJson>>,
    pub b: Vec<EntryJson>,
}

impl WlssProblemJson {
    pub fn decode<S: Scalar>(&self) -> Result<(DMatrix<S>, DMatrix<S>, DVector<S>)> {
        if S::KIND != self.scalar {
            return Err(Error::Parse(format!(
                "payload is {}, expected {}",
                self.scalar,
                S::KIND
            )));
        }
        let n = self.w.len();
        let w = decode_rows_checked::<S>(&self.w, n)?;
        let a_width = self.a.first().map(|r| r.len()).unwrap_or(0);
        let a = decode_rows_checked::<S>(&self.a, a_width)?;
        let b = decode_vector::<S>(&self.b)?;
        Ok((w, a, b))
    }
}

/// Solver answer: minimum-norm point, direction generators (rows), the
/// achieved weighted residual, and the residual of the normal equations at
/// the point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WlssAnswerJson {
    pub scalar: ScalarKind,
    pub nonempty: bool,
    pub point: Vec<EntryJson>,
    pub directions: Vec<Vec<EntryJson>>,
    pub residual: f64,
    pub normal_eq_residual: f64,
}

impl WlssAnswerJson {
    pub fn new<S: Scalar>(
        set: &AffineSet<S>,
        residual: f64,
        normal_eq_residual: f64,
    ) -> Self {
        match set {
            AffineSet::Empty => WlssAnswerJson {
                scalar: S::KIND,
                nonempty: false,
                point: Vec::new(),
                directions: Vec::new(),
                residual,
                normal_eq_residual,
            },
            AffineSet::Set { point, directions } => WlssAnswerJson {
                scalar: S::KIND,
                nonempty: true,
                point: encode_vector(point),
                directions: encode_matrix_rows(&directions.basis().transpose()),
                residual,
                normal_eq_residual,
            },
        }
    }
}

/// Affine-set payload used by `relation apply`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineSetJson {
    pub scalar: ScalarKind,
    pub nonempty: bool,
    pub point: Vec<EntryJson>,
    pub directions: Vec<Vec<EntryJson>>,
}

impl AffineSetJson {
    pub fn from_set<S: Scalar>(set: &AffineSet<S>) -> Self {
        match set {
            AffineSet::Empty => AffineSetJson {
                scalar: S::KIND,
                nonempty: false,
                point: Vec::new(),
                directions: Vec::new(),
            },
            AffineSet::Set { point, directions } => AffineSetJson {
                scalar: S::KIND,
                nonempty: true,
                point: encode_vector(point),
                directions: encode_matrix_rows(&directions.basis().transpose()),
            },
        }
    }
}

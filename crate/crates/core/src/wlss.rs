//! Weighted least squares with a positive-semidefinite (possibly singular)
//! weight `W`, solved through the multivalued projection
//! `P_{W, ran A} = P_{ran A, (ran A)^{⊥_W}}`.
//!
//! A vector `x₀` is a `W`-least-squares solution of `Ax = b` when
//! `‖Ax₀ − b‖_W` minimizes `‖y − b‖_W` over `y ∈ ran A`; the full solution
//! set is `A⁻¹ P_{W, ran A} b`, and the solver routes through exactly that
//! relation composition so the projection machinery carries the work. The
//! normal equations `A*WA x = A*W b` appear only as the test oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::projection::MvProjection;
use crate::relation::{AffineSet, LinearRelation};
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// A weighted least-squares problem `min ‖Ax − b‖_W`.
#[derive(Debug, Clone)]
pub struct WlssProblem<S: Scalar> {
    w: DMatrix<S>,
    a: DMatrix<S>,
    b: DVector<S>,
    tol: f64,
}

fn check_psd<S: Scalar>(w: &DMatrix<S>, tol: f64) -> Result<()> {
    if w.nrows() != w.ncols() {
        return Err(Error::dim("weight matrix must be square"));
    }
    let scale = linalg::spectral_norm(w).max(1.0);
    if linalg::op_distance(&w.adjoint(), w) > tol * scale {
        return Err(Error::pre("weight matrix is not Hermitian"));
    }
    if w.nrows() > 0 {
        let (eigs, _) = linalg::hermitian_eigen(&linalg::hermitian_part(w));
        if let Some(min) = eigs.last() {
            if *min < -tol * scale {
                return Err(Error::pre(format!("weight matrix has eigenvalue {min}")));
            }
        }
    }
    Ok(())
}

impl<S: Scalar> WlssProblem<S> {
    pub fn new(w: DMatrix<S>, a: DMatrix<S>, b: DVector<S>, tol: f64) -> Result<Self> {
        check_psd(&w, tol)?;
        if a.nrows() != w.nrows() || b.len() != w.nrows() {
            return Err(Error::dim(format!(
                "shapes disagree: W is {}×{}, A is {}×{}, b has length {}",
                w.nrows(),
                w.ncols(),
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        Ok(WlssProblem { w, a, b, tol })
    }

    pub fn weight(&self) -> &DMatrix<S> {
        &self.w
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<S> {
        &self.b
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Solve through `A⁻¹ P_{W, ran A} b`.
    pub fn solve(&self) -> Result<AffineSet<S>> {
        solve(&self.w, &self.a, &self.b, self.tol)
    }
}

/// The `W`-orthogonal companion
/// `S^{⊥_W} = {x : ⟨x, s⟩_W = 0 for all s ∈ S} = ker(B_S* W) = (W(S))⊥`.
pub fn w_companion<S: Scalar>(w: &DMatrix<S>, s: &Subspace<S>, tol: f64) -> Result<Subspace<S>> {
    check_psd(w, tol)?;
    if s.ambient_dim() != w.nrows() {
        return Err(Error::dim("w_companion: subspace lives in the wrong space"));
    }
    let constraints = s.basis().adjoint() * w;
    let cutoff = tol * linalg::spectral_norm(w);
    Ok(Subspace::from_orthonormal(
        linalg::nullspace_basis_cutoff(&constraints, cutoff),
        tol,
    ))
}

/// The multivalued projection `P_{W, ran A} = P_{ran A, (ran A)^{⊥_W}}`.
///
/// Its domain is the whole space for every psd `W`: a vector of
/// `(ran A)⊥ ∩ W(ran A)` has the form `Ws` with `⟨Ws, s⟩ = 0`, which forces
/// `W^{1/2} s = 0` and hence `Ws = 0`, so `ran A + (ran A)^{⊥_W}` is
/// everything.
pub fn w_projection<S: Scalar>(w: &DMatrix<S>, a: &DMatrix<S>, tol: f64) -> Result<MvProjection<S>> {
    if a.nrows() != w.nrows() {
        return Err(Error::dim("w_projection: A and W act on different spaces"));
    }
    let range = Subspace::from_generators(a, tol);
    let kernel = w_companion(w, &range, tol)?;
    MvProjection::new(&range, &kernel)
}

/// Full solution set of the `W`-least-squares problem as an affine set
/// (minimum-norm point plus directions). Empty only if `b ∉ dom P_{W,ran A}`,
/// which cannot occur for psd weights in finite dimensions; the guard stays
/// for the general contract.
pub fn solve<S: Scalar>(
    w: &DMatrix<S>,
    a: &DMatrix<S>,
    b: &DVector<S>,
    tol: f64,
) -> Result<AffineSet<S>> {
    if b.len() != a.nrows() {
        return Err(Error::dim("solve: right-hand side has the wrong length"));
    }
    let projection = w_projection(w, a, tol)?;
    let pullback = LinearRelation::graph_of(a, tol)
        .inverse()
        .compose(projection.relation())?;
    pullback.apply(b)
}

/// The weighted residual `‖Ax − b‖_W = ‖W^{1/2}(Ax − b)‖`.
pub fn residual<S: Scalar>(
    w: &DMatrix<S>,
    a: &DMatrix<S>,
    x: &DVector<S>,
    b: &DVector<S>,
    tol: f64,
) -> Result<f64> {
    check_psd(w, tol)?;
    if x.len() != a.ncols() || b.len() != a.nrows() || a.nrows() != w.nrows() {
        return Err(Error::dim("residual: shapes disagree"));
    }
    let root = linalg::hermitian_sqrt_psd(&linalg::hermitian_part(w), tol);
    Ok((root * (a * x - b)).norm())
}

/// Closed-form optimal value `‖(I − P_{W^{1/2}(ran A)}) W^{1/2} b‖`, used to
/// cross-check the solver per instance.
pub fn optimal_value<S: Scalar>(
    w: &DMatrix<S>,
    a: &DMatrix<S>,
    b: &DVector<S>,
    tol: f64,
) -> Result<f64> {
    check_psd(w, tol)?;
    let root = linalg::hermitian_sqrt_psd(&linalg::hermitian_part(w), tol);
    let weighted_range = Subspace::from_generators(&(&root * a), tol);
    let wb = &root * b;
    Ok((&wb - weighted_range.project_vector(&wb)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, gaussian_vector, trial_rng};
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

    fn random_psd<S: Scalar>(rng: &mut impl rand::Rng, dim: usize, rank: usize) -> DMatrix<S> {
        let g = gaussian_matrix::<S, _>(rng, dim, rank);
        linalg::hermitian_part(&(&g * g.adjoint()))
    }

    /// Independent oracle: the solution set of the normal equations
    /// `A*WA x = A*W b` as an affine set, computed through the square-root
    /// form (`null(A*WA) = null(W^{1/2}A)` exactly, with better conditioning).
    fn normal_equation_set<S: Scalar>(
        w: &DMatrix<S>,
        a: &DMatrix<S>,
        b: &DVector<S>,
    ) -> AffineSet<S> {
        let root = linalg::hermitian_sqrt_psd(w, TOL);
        let weighted_a = &root * a;
        let particular = linalg::pinv(&weighted_a, TOL) * (&root * b);
        let directions = Subspace::from_orthonormal(linalg::nullspace_basis(&weighted_a, TOL), TOL);
        let point = &particular - directions.project_vector(&particular);
        AffineSet::Set { point, directions }
    }

    #[test]
    fn companion_cases() {
        let m = Subspace::<f64>::span(
            &[DVector::from_column_slice(&[1.0, 0.0])],
            2,
            TOL,
        )
        .unwrap();
        let c = w_companion(&DMatrix::<f64>::identity(2, 2), &m, TOL).unwrap();
        assert!(c.equals(&m.complement()));
        let c = w_companion(&diag::<f64>(&[1.0, 0.0]), &m, TOL).unwrap();
        assert!(c.equals(&m.complement()));
        let c = w_companion(&diag::<f64>(&[0.0, 1.0]), &m, TOL).unwrap();
        assert!(c.is_full());
        assert!(matches!(
            w_companion(&diag::<f64>(&[-1.0, 1.0]), &m, TOL),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn projection_cases() {
        let a = DMatrix::<f64>::from_column_slice(2, 1, &[1.0, 1.0]);
        let p = w_projection(&DMatrix::<f64>::identity(2, 2), &a, TOL).unwrap();
        assert!(p.kernel().equals(&p.range().complement()));

        let p = w_projection(&DMatrix::<f64>::zeros(2, 2), &a, TOL).unwrap();
        assert!(p.kernel().is_full());
        assert!(p.relation().mul_part().equals(p.range()));

        // W = diag(1,0), A = (1,1)ᵗ: companion is the nullspace of (1,1)·W,
        // which is span{e2}
        let p = w_projection(&diag::<f64>(&[1.0, 0.0]), &a, TOL).unwrap();
        let e2 = Subspace::span(&[DVector::from_column_slice(&[0.0, 1.0])], 2, TOL).unwrap();
        assert!(p.kernel().equals(&e2));
        assert!(p.relation().dom().is_full());
    }

    #[test]
    fn solve_trivial_cases() {
        let mut rng = trial_rng(1, "wlss", 0);
        let b = gaussian_vector::<f64, _>(&mut rng, 3);
        let id = DMatrix::<f64>::identity(3, 3);
        match solve(&id, &id, &b, TOL).unwrap() {
            AffineSet::Set { point, directions } => {
                assert!((point - &b).norm() < 1e-9);
                assert!(directions.is_zero());
            }
            AffineSet::Empty => panic!("identity problem is solvable"),
        }

        // W = diag(1,0), A = (1,1)ᵗ, b = (3,7): minimize |x−3| → x = 3
        let a = DMatrix::<f64>::from_column_slice(2, 1, &[1.0, 1.0]);
        let b = DVector::from_column_slice(&[3.0, 7.0]);
        match solve(&diag::<f64>(&[1.0, 0.0]), &a, &b, TOL).unwrap() {
            AffineSet::Set { point, directions } => {
                assert!((point[0] - 3.0).abs() < 1e-9);
                assert!(directions.is_zero());
            }
            AffineSet::Empty => panic!("scalar problem is solvable"),
        }

        // W = I, A = diag(1,0), b = (1,2): x = (1, free)
        let a = diag::<f64>(&[1.0, 0.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0]);
        match solve(&DMatrix::identity(2, 2), &a, &b, TOL).unwrap() {
            AffineSet::Set { point, directions } => {
                assert!((point - DVector::from_column_slice(&[1.0, 0.0])).norm() < 1e-9);
                let e2 = Subspace::span(&[DVector::from_column_slice(&[0.0, 1.0])], 2, TOL).unwrap();
                assert!(directions.equals(&e2));
            }
            AffineSet::Empty => panic!("diagonal problem is solvable"),
        }
    }

    #[test]
    fn residual_cases() {
        let mut rng = trial_rng(2, "residual", 0);
        let a = gaussian_matrix::<f64, _>(&mut rng, 3, 3);
        let x = gaussian_vector::<f64, _>(&mut rng, 3);
        let b = &a * &x;
        let r = residual(&DMatrix::identity(3, 3), &a, &x, &b, TOL).unwrap();
        assert!(r < 1e-10);
        let r = residual(&DMatrix::zeros(3, 3), &a, &x, &gaussian_vector::<f64, _>(&mut rng, 3), TOL)
            .unwrap();
        assert!(r < 1e-12);
    }

    fn solver_laws<S: Scalar>(trials: u64) {
        for trial in 0..trials {
            let mut rng = trial_rng(trial, "wlss-laws", 1);
            let n = 2 + (trial as usize) % 5;
            let k = 1 + (trial as usize) % n;
            let w_rank = 1 + (trial as usize * 3) % n;
            let w = random_psd::<S>(&mut rng, n, w_rank);
            let a = gaussian_matrix::<S, _>(&mut rng, n, k);
            let b = gaussian_vector::<S, _>(&mut rng, n);
            let solution = solve(&w, &a, &b, TOL).unwrap();
            let AffineSet::Set { ref point, ref directions } = solution else {
                panic!("psd problem must be solvable at trial {trial}");
            };

            // agrees with the normal-equation solution set
            let oracle = normal_equation_set(&w, &a, &b);
            assert!(solution.set_eq(&oracle, 1e-7), "normal equations differ at trial {trial}");

            // achieves the closed-form optimal value
            let opt = optimal_value(&w, &a, &b, TOL).unwrap();
            let achieved = residual(&w, &a, point, &b, TOL).unwrap();
            assert!(
                (achieved - opt).abs() <= 1e-8 * opt.max(1.0),
                "optimal value missed at trial {trial}: {achieved} vs {opt}"
            );

            // every probe is at least as bad
            for probe in 0..20 {
                let _ = probe;
                let x = gaussian_vector::<S, _>(&mut rng, k);
                let r = residual(&w, &a, &x, &b, TOL).unwrap();
                assert!(r + 1e-9 >= achieved, "probe beat the solver at trial {trial}");
            }

            // scaling invariance of the solution set
            let scaled = solve(&(&w * S::from_real(3.5)), &a, &b, TOL).unwrap();
            assert!(scaled.set_eq(&solution, 1e-7), "scaling changed the set at trial {trial}");

            // minimum-norm representative is orthogonal to the directions
            assert!((directions.basis().adjoint() * point).norm() < 1e-8);
        }
    }

    #[test]
    fn solver_laws_real() {
        solver_laws::<f64>(40);
    }

    #[test]
    fn solver_laws_complex() {
        solver_laws::<Complex64>(15);
    }

    #[test]
    fn domain_is_always_full_for_psd_weights() {
        for trial in 0..30 {
            let mut rng = trial_rng(trial, "wlss-domain", 2);
            let n = 2 + (trial as usize) % 5;
            let w = random_psd::<f64>(&mut rng, n, 1 + (trial as usize) % n);
            let a = gaussian_matrix::<f64, _>(&mut rng, n, 1 + (trial as usize) % n);
            let p = w_projection(&w, &a, TOL).unwrap();
            assert!(p.relation().dom().is_full(), "domain not full at trial {trial}");
        }
    }
}

//! Dense numerical primitives shared by all modules: rank-revealing
//! orthonormalization, orthogonal complements, pseudo-inverses and Hermitian
//! functional calculus, all with a relative singular-value tolerance.
//!
//! Numerical rank is always decided by `σ_i ≥ tol · σ_max`; an exactly zero
//! matrix has rank zero. Degenerate shapes (zero rows or columns) are legal
//! everywhere since the zero subspace occurs constantly in this calculus.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Thin singular value decomposition `a = u · diag(σ) · v*`.
///
/// `sigma` has one entry per column of `a`, sorted descending; column `j` of
/// `u` is the left singular vector for `σ_j` (zero when `σ_j = 0`), and `v` is
/// a full unitary whose trailing columns span `ker(a)` exactly.
#[derive(Debug, Clone)]
pub struct ThinSvd<S: Scalar> {
    pub u: DMatrix<S>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<S>,
}

/// One-sided Jacobi SVD.
///
/// The stock Golub–Kahan SVD silently loses accuracy on matrices with
/// clustered singular values (projectors most of all, and this crate
/// factorizes projector-like matrices constantly), so the backend is a cyclic
/// one-sided Jacobi iteration: pairs of columns are rotated until mutually
/// orthogonal, which bounds `|u_i* u_j|` by the sweep threshold regardless of
/// the spread of the spectrum.
pub fn jacobi_svd<S: Scalar>(a: &DMatrix<S>) -> ThinSvd<S> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<S>::identity(n, n);
    let thr = 30.0 * f64::EPSILON;
    let max_sweeps = 64;

    // prescale to O(1) so the subnormal floor below is a relative ~1e-308
    // cutoff; rank-deficient inputs leave cancellation-noise columns whose
    // pairwise Gram entries carry no directional information at all, and
    // rotating by such a "phase" destroys the unitarity of v
    let a_scale = (0..n).map(|j| w.column(j).norm()).fold(0.0f64, f64::max);
    if a_scale > 0.0 && a_scale.is_finite() {
        w.scale_mut(1.0 / a_scale);
    }

    let mut norms2: Vec<f64> = vec![0.0; n];
    for _ in 0..max_sweeps {
        // refresh cached squared norms once per sweep to stop drift
        for (j, nj) in norms2.iter_mut().enumerate() {
            *nj = w.column(j).norm_squared();
        }
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let c: S = w.column(i).dotc(&w.column(j));
                // hypot keeps the modulus accurate when the component squares
                // underflow
                let (c_re, c_im) = c.re_im();
                let c_abs = c_re.hypot(c_im);
                // separate square roots: the product of two tiny squared
                // norms underflows while the norms themselves do not
                let scale = norms2[i].sqrt() * norms2[j].sqrt();
                if c_abs < f64::MIN_POSITIVE || c_abs <= thr * scale {
                    continue;
                }
                // phase removal makes the 2×2 Gram real, then a classical
                // Jacobi rotation annihilates the off-diagonal entry;
                // unscale divides componentwise and cannot underflow like
                // a full complex division would
                let phase_conj = c.conjugate().unscale(c_abs);
                let zeta = (norms2[j] - norms2[i]) / (2.0 * c_abs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                if t == 0.0 {
                    continue;
                }
                rotated = true;
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (cs_s, sn_s) = (S::from_real(cs), S::from_real(sn));
                for (mat, rows) in [(&mut w, m), (&mut v, n)] {
                    for r in 0..rows {
                        let xi = mat[(r, i)];
                        let xj = mat[(r, j)] * phase_conj;
                        mat[(r, i)] = xi * cs_s - xj * sn_s;
                        mat[(r, j)] = xi * sn_s + xj * cs_s;
                    }
                }
                let (ai, aj) = (norms2[i], norms2[j]);
                norms2[i] = (cs * cs * ai + sn * sn * aj - 2.0 * cs * sn * c_abs).max(0.0);
                norms2[j] = sn * sn * ai + cs * cs * aj + 2.0 * cs * sn * c_abs;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let final_norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| final_norms[j].partial_cmp(&final_norms[i]).unwrap());

    let mut u = DMatrix::<S>::zeros(m, n);
    let mut v_sorted = DMatrix::<S>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = final_norms[src];
        sigma.push(s * a_scale);
        if s > 0.0 {
            let col = w.column(src) / S::from_real(s);
            u.set_column(dst, &col);
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    ThinSvd { u, sigma, v: v_sorted }
}

/// Orthonormal basis (as columns) of the column span of `a`, with the rank
/// cutoff relative to the matrix's own largest singular value.
pub fn orthonormal_range<S: Scalar>(a: &DMatrix<S>, tol: f64) -> DMatrix<S> {
    let svd = jacobi_svd(a);
    let cutoff = tol * svd.sigma.first().copied().unwrap_or(0.0);
    let rank = rank_with_cutoff(&svd.sigma, cutoff);
    svd.u.columns(0, rank).into_owned()
}

/// Orthonormal basis of the column span with an absolute singular-value
/// cutoff. The cutoff must be anchored to the scale of the data that produced
/// `a`: a derived residual matrix may consist entirely of rounding noise, and
/// thresholding it against its own `σ_max` would manufacture rank.
pub fn orthonormal_range_cutoff<S: Scalar>(a: &DMatrix<S>, cutoff: f64) -> DMatrix<S> {
    let svd = jacobi_svd(a);
    let rank = rank_with_cutoff(&svd.sigma, cutoff);
    svd.u.columns(0, rank).into_owned()
}

/// Number of singular values at or above the absolute `cutoff` (descending
/// input); exact zeros never count.
pub fn rank_with_cutoff(sv: &[f64], cutoff: f64) -> usize {
    sv.iter().take_while(|&&s| s >= cutoff && s > 0.0).count()
}

/// Orthonormal basis of the orthogonal complement of `ran(u)`, for `u` with
/// orthonormal columns: the kernel of `u*`, whose singular values all equal 1,
/// read off the unitary factor of the Jacobi sweep.
pub fn complement_of_orthonormal<S: Scalar>(u: &DMatrix<S>) -> DMatrix<S> {
    let n = u.nrows();
    if u.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    nullspace_basis_cutoff(&u.adjoint(), 0.5)
}

/// Orthonormal basis of `ker(a) = {x : a x = 0}`, with the rank cutoff
/// relative to `σ_max(a)`.
pub fn nullspace_basis<S: Scalar>(a: &DMatrix<S>, tol: f64) -> DMatrix<S> {
    let svd = jacobi_svd(a);
    let cutoff = tol * svd.sigma.first().copied().unwrap_or(0.0);
    let rank = rank_with_cutoff(&svd.sigma, cutoff);
    svd.v.columns(rank, a.ncols() - rank).into_owned()
}

/// `ker(a)` with an absolute singular-value cutoff (see
/// [`orthonormal_range_cutoff`] for when the anchor matters). The result is
/// exactly orthonormal since it is a slice of the unitary `v`.
pub fn nullspace_basis_cutoff<S: Scalar>(a: &DMatrix<S>, cutoff: f64) -> DMatrix<S> {
    let svd = jacobi_svd(a);
    let rank = rank_with_cutoff(&svd.sigma, cutoff);
    svd.v.columns(rank, a.ncols() - rank).into_owned()
}

/// Moore–Penrose inverse with rank cutoff `σ_i ≥ tol · σ_max`.
pub fn pinv<S: Scalar>(a: &DMatrix<S>, tol: f64) -> DMatrix<S> {
    let svd = jacobi_svd(a);
    let cutoff = tol * svd.sigma.first().copied().unwrap_or(0.0);
    pinv_from(&svd, a.shape(), cutoff)
}

/// Moore–Penrose inverse with an absolute singular-value cutoff.
pub fn pinv_cutoff<S: Scalar>(a: &DMatrix<S>, cutoff: f64) -> DMatrix<S> {
    pinv_from(&jacobi_svd(a), a.shape(), cutoff)
}

fn pinv_from<S: Scalar>(svd: &ThinSvd<S>, (m, n): (usize, usize), cutoff: f64) -> DMatrix<S> {
    let rank = rank_with_cutoff(&svd.sigma, cutoff);
    let mut out = DMatrix::<S>::zeros(n, m);
    for j in 0..rank {
        let inv = S::from_real(1.0 / svd.sigma[j]);
        out += (svd.v.column(j) * inv) * svd.u.column(j).adjoint();
    }
    out
}

/// Singular values of `a` in descending order (length `min(m, n)`).
pub fn singular_values<S: Scalar>(a: &DMatrix<S>) -> Vec<f64> {
    let mut sigma = jacobi_svd(a).sigma;
    sigma.truncate(a.nrows().min(a.ncols()));
    sigma
}

/// Operator 2-norm (largest singular value); 0 for empty shapes.
pub fn spectral_norm<S: Scalar>(a: &DMatrix<S>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    jacobi_svd(a).sigma.first().copied().unwrap_or(0.0)
}

/// Hermitian eigendecomposition as `(eigenvalues, unitary q)` with eigenvalues
/// sorted descending and columns of `q` matching.
pub fn hermitian_eigen<S: Scalar>(a: &DMatrix<S>) -> (Vec<f64>, DMatrix<S>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen needs a square matrix");
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut q = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, q)
}

/// Square root of a Hermitian positive-semidefinite matrix. Eigenvalues below
/// `tol · λ_max` (in particular the negative rounding noise) are clipped to
/// zero before taking the root, so the result is psd in exact rank.
pub fn hermitian_sqrt_psd<S: Scalar>(a: &DMatrix<S>, tol: f64) -> DMatrix<S> {
    apply_hermitian_psd(a, tol, f64::sqrt)
}

/// Spectral calculus `f(a)` for Hermitian psd `a`, clipping eigenvalues below
/// `tol · λ_max` to zero before applying `f` (with `f(0) = 0` enforced).
pub fn apply_hermitian_psd<S: Scalar>(a: &DMatrix<S>, tol: f64, f: impl Fn(f64) -> f64) -> DMatrix<S> {
    let (values, q) = hermitian_eigen(a);
    let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda_max > 0.0 && lambda >= tol * lambda_max {
            let col = q.column(k);
            let w = S::from_real(f(lambda));
            out += col * col.adjoint() * w;
        }
    }
    out
}

/// Hermitian symmetrization `(a + a*) / 2`.
pub fn hermitian_part<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    (a + a.adjoint()) * S::from_real(0.5)
}

/// `‖a − b‖₂`, a graph/projector distance helper.
pub fn op_distance<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> f64 {
    spectral_norm(&(a - b))
}

/// Frobenius norm of a vector difference.
pub fn vec_distance<S: Scalar>(a: &DVector<S>, b: &DVector<S>) -> f64 {
    (a - b).norm()
}

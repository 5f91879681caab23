//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::MAX_CONDITION;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(H + H*) / 2`, removing rounding asymmetry before an eigensolve.
pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part of `h`, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    if h.is_empty() {
        return Vec::new();
    }
    let mut vals: Vec<f64> = hermitian_part(h).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Ascending eigenvalues and matching eigenvector columns of the Hermitian part of `h`.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).last().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ratio of extreme eigenvalues of a Hermitian form; infinite when not positive definite.
pub fn condition_estimate(h: &CMatrix) -> f64 {
    let vals = hermitian_eigenvalues(h);
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn check_condition(h: &CMatrix) -> Result<f64> {
    let estimate = condition_estimate(h);
    if estimate > MAX_CONDITION || estimate.is_nan() {
        return Err(Error::Conditioning {
            estimate,
            limit: MAX_CONDITION,
        });
    }
    Ok(estimate)
}

/// Lower Cholesky factor `L` with `h = L L*`.
pub fn cholesky_lower(h: &CMatrix) -> Result<CMatrix> {
    hermitian_part(h)
        .cholesky()
        .map(|ch| ch.unpack())
        .ok_or(Error::Conditioning {
            estimate: f64::INFINITY,
            limit: MAX_CONDITION,
        })
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &CMatrix, b: &CMatrix) -> CMatrix {
    l.solve_lower_triangular(b)
        .expect("triangular factor from a successful Cholesky is nonsingular")
}

/// Solves `L* X = B` for lower-triangular `L`.
pub fn solve_lower_adjoint(l: &CMatrix, b: &CMatrix) -> CMatrix {
    l.adjoint()
        .solve_upper_triangular(b)
        .expect("triangular factor from a successful Cholesky is nonsingular")
}

/// Square root of the largest eigenvalue of the pencil `(A* G A, G)`.
///
/// Uses the congruence `G = L L*`, which turns the pencil into the standard
/// Hermitian matrix `L⁻¹ A* G A L⁻*`.
pub fn pencil_norm(gram: &CMatrix, action: &CMatrix) -> Result<f64> {
    if gram.is_empty() {
        return Ok(0.0);
    }
    check_condition(gram)?;
    let l = cholesky_lower(gram)?;
    let top = action.adjoint() * gram * action;
    let half = solve_lower(&l, &top);
    let reduced = solve_lower(&l, &half.adjoint());
    Ok(max_eigenvalue(&reduced).max(0.0).sqrt())
}

/// Kronecker product `a ⊗ I_m`.
pub fn kron_identity(a: &CMatrix, m: usize) -> CMatrix {
    CMatrix::from_fn(a.nrows() * m, a.ncols() * m, |r, s| {
        if r % m == s % m {
            a[(r / m, s / m)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

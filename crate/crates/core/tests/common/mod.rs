#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use nevpick::kernels::Domain;
use nevpick::linalg::{c, hermitian_eigen, hermitian_eigenvalues, CMatrix, C64};
use nevpick::sampling;
use nevpick::{gram_matrix, DiscreteKernel, IndexSet, KernelSpec, Point, TargetData};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const BRIDGE_KERNELS: [&str; 3] = ["szego", "dirichlet", "drury-arveson:2"];

pub fn kernel(name: &str) -> KernelSpec {
    name.parse().expect("catalog kernel")
}

pub fn rng(seed: u64, stream: usize) -> ChaCha8Rng {
    sampling::trial_rng(seed, stream)
}

/// Random points at radius ≤ `radius` that give a usable Gram matrix.
pub fn random_kernel(rng: &mut ChaCha8Rng, spec: &KernelSpec, n: usize, radius: f64) -> (Vec<Point>, DiscreteKernel) {
    loop {
        let points = sampling::random_points(rng, spec.domain(), radius, n);
        if let Ok(g) = gram_matrix(spec, &points) {
            if g.condition_estimate < 1e8 {
                return (points.clone(), DiscreteKernel::from_gram(&g));
            }
        }
    }
}

pub fn random_target(rng: &mut ChaCha8Rng, domain: &[usize], m: usize, cap: f64) -> TargetData {
    let values: BTreeMap<usize, CMatrix> = domain
        .iter()
        .map(|&i| (i, sampling::random_contraction(rng, m, cap)))
        .collect();
    TargetData::new(m, values).unwrap()
}

pub fn set(v: &[usize]) -> IndexSet {
    v.iter().copied().collect()
}

pub fn ball_or_disc(spec: &KernelSpec) -> Domain {
    spec.domain()
}

/// Pick matrix written out blockwise: `(t² − z(i) z(j)*) · g(j, i)` over the target domain.
pub fn pick_oracle(g: &DiscreteKernel, target: &TargetData, t: f64) -> CMatrix {
    let idx: Vec<usize> = target.domain().to_vec();
    let m = target.m();
    let k = idx.len();
    let mut p = CMatrix::zeros(k * m, k * m);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            let zi = target.get(i).unwrap();
            let zj = target.get(j).unwrap();
            let gji = g.get(j, i);
            for r in 0..m {
                for s in 0..m {
                    let mut zz = c(0.0, 0.0);
                    for q in 0..m {
                        zz += zi[(r, q)] * zj[(s, q)].conj();
                    }
                    let id = if r == s { t * t } else { 0.0 };
                    p[(a * m + r, b * m + s)] = (c(id, 0.0) - zz) * gji;
                }
            }
        }
    }
    p
}

/// Smallest eigenvalue of the oracle Pick matrix and its spectral scale.
pub fn pick_oracle_spectrum(g: &DiscreteKernel, target: &TargetData, t: f64) -> (f64, f64) {
    let vals = hermitian_eigenvalues(&pick_oracle(g, target, t));
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (vals[0], scale)
}

/// Inverse square root of a positive definite Hermitian matrix via its eigendecomposition.
fn inv_sqrt(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(1.0 / v.sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Orthonormal basis (columns) of the null space of `a`, from its SVD.
fn null_space(a: &CMatrix, cols: usize) -> CMatrix {
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    // Pad to square so the SVD returns a full right basis.
    let mut padded = CMatrix::zeros(cols.max(a.nrows()), cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(true, true);
    let v_t = svd.v_t.unwrap();
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= 1e-12 * top.max(1.0))
        .collect();
    CMatrix::from_fn(cols, keep.len(), |r, k| v_t[(keep[k], r)].conj())
}

/// Norm of the compression of `T` to `H(outer) ⊖ H(outer ∖ inner)`, computed with an explicit
/// Gram projection in natural slot order. Values on `outer ∖ inner` come from `extension`.
pub fn projection_norm(g: &DiscreteKernel, target: &TargetData, outer: &IndexSet, extension: Option<&TargetData>) -> f64 {
    let m = target.m();
    let pts: Vec<usize> = outer.iter().filter(|&i| g.get(i, i).norm() > 1e-12).collect();
    let dim = pts.len() * m;
    // ⟨e_r g_i, e_s g_j⟩ = g(i, j) δ_rs, linear in the first slot.
    let gram = CMatrix::from_fn(dim, dim, |a, b| {
        if a % m == b % m {
            g.get(pts[b / m], pts[a / m])
        } else {
            c(0.0, 0.0)
        }
    });
    let mut action = CMatrix::zeros(dim, dim);
    let zero = CMatrix::zeros(m, m);
    for (k, &i) in pts.iter().enumerate() {
        let v = target
            .get(i)
            .or_else(|| extension.and_then(|e| e.get(i)))
            .unwrap_or(&zero);
        for r in 0..m {
            for s in 0..m {
                action[(k * m + r, k * m + s)] = v[(s, r)].conj();
            }
        }
    }
    let removed: Vec<usize> = (0..dim).filter(|&a| !target.domain().contains(pts[a / m])).collect();
    // Vectors Gram-orthogonal to every removed slot: (Ĝ c)_r = 0 for removed r.
    let constraint = CMatrix::from_fn(removed.len(), dim, |r, b| gram[(removed[r], b)]);
    let basis = null_space(&constraint, dim);
    if basis.ncols() == 0 {
        return 0.0;
    }
    // Gram projection onto the span of the removed slots, then its complement.
    let proj_removed = if removed.is_empty() {
        CMatrix::zeros(dim, dim)
    } else {
        let r = CMatrix::from_fn(dim, removed.len(), |a, k| if a == removed[k] { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let rgr = r.adjoint() * &gram * &r;
        let rgr_inv = rgr.try_inverse().unwrap();
        &r * rgr_inv * r.adjoint() * &gram
    };
    let p_k = CMatrix::identity(dim, dim) - proj_removed;
    let image = p_k * &action * &basis;
    let lhs = image.adjoint() * &gram * &image;
    let rhs = basis.adjoint() * &gram * &basis;
    let w = inv_sqrt(&rhs);
    let whitened = &w * lhs * &w;
    let whitened = (&whitened + whitened.adjoint()) * c(0.5, 0.0);
    hermitian_eigenvalues(&whitened).last().copied().unwrap().max(0.0).sqrt()
}

/// Uncompressed norm from the projection oracle.
pub fn plain_norm(g: &DiscreteKernel, target: &TargetData) -> f64 {
    projection_norm(g, target, &target.domain(), None)
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * BigInt::from(k))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Scalar target from `(index, value)` pairs.
pub fn scalar_target(values: &[(usize, C64)]) -> TargetData {
    TargetData::scalar(values).unwrap()
}

pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    DMatrix::from_fn(rows.len(), rows[0].len(), |r, s| c(rows[r][s], 0.0))
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

//! Finite-dimensional model of multiplier adjoints on a discrete kernel.
//!
//! For a kernel `g` on `N = {1..n}` the space `H_{g,m}` is spanned by `a·g_i`
//! with `a ∈ C^m` and `i ∈ spt(g)`, and
//! `⟨a g_i, b g_j⟩ = g(i, j)·b*a`. Elements are stored as coefficient vectors
//! with slot `(i, r)` holding the `r`-th entry of the coefficient of `g_i`,
//! so the coefficient Gram form is `Gᵀ ⊗ I_m` (the transpose because the
//! form is linear in the first slot).
//!
//! `T_{g,z}` acts by `a g_i ↦ (z(i)* a) g_i`. A compression `T_{g,z}(I₁)` lives
//! on `H(I₀, I₁) = H(I₁) ⊖ H(I₁∖I₀)`: Cholesky-orthonormalizing the slots with
//! the removed points first turns the trailing orthonormal vectors into a
//! basis of `H(I₀, I₁)`, and the compression is the trailing block of the
//! operator's matrix in that orthonormal basis.

use std::collections::BTreeMap;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::report::{AuditKernel, AuditReport, Instance, ReportBuilder, TrialOutcome, Violation};
use crate::sampling;
use crate::tolerances::{EXTENSION_TOL, HERMITIAN_TOL, PD_TOL, PSD_TOL, SUPPORT_TOL};
use crate::wire::{self, IndexSet};

/// A kernel on `N = {1..n}`: an `n×n` matrix `g(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    entries: CMatrix,
}

impl DiscreteKernel {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::argument(format!(
                "kernel matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::argument("kernel matrix has non-finite entries"));
        }
        Ok(DiscreteKernel { entries })
    }

    pub fn from_gram(gram: &GramMatrix) -> Self {
        DiscreteKernel {
            entries: gram.entries.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `g(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n()).map(|i| self.entries[(i, i)].norm()).fold(0.0, f64::max)
    }

    pub fn support(&self) -> IndexSet {
        let cutoff = SUPPORT_TOL * self.max_diagonal();
        (0..self.n()).filter(|&i| self.entries[(i, i)].norm() > cutoff).collect()
    }

    /// `g` restricted to `rows × cols`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |a, b| self.entries[(rows[a], cols[b])])
    }

    /// Coefficient Gram form over point slots `points` (point-major, `m` slots each).
    pub fn coefficient_gram(&self, points: &[usize], m: usize) -> CMatrix {
        let gt = CMatrix::from_fn(points.len(), points.len(), |a, b| self.entries[(points[b], points[a])]);
        linalg::kron_identity(&gt, m)
    }

    pub fn validate(&self) -> KernelValidation {
        validate_kernel(self)
    }
}

impl Serialize for DiscreteKernel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            n: usize,
            #[serde(with = "wire::matrix")]
            entries: &'a CMatrix,
        }
        Wire {
            n: self.n(),
            entries: &self.entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteKernel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            n: usize,
            #[serde(with = "wire::matrix")]
            entries: CMatrix,
        }
        let w = Wire::deserialize(d)?;
        if w.entries.nrows() != w.n {
            return Err(D::Error::custom(format!("n = {} but entries has {} rows", w.n, w.entries.nrows())));
        }
        DiscreteKernel::new(w.entries).map_err(D::Error::custom)
    }
}

/// A partial map `z: I → M_m(C)` with `I ⊆ {1..n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetData {
    m: usize,
    values: BTreeMap<usize, CMatrix>,
}

impl TargetData {
    pub fn new(m: usize, values: BTreeMap<usize, CMatrix>) -> Result<Self> {
        if m == 0 {
            return Err(Error::argument("block size m must be positive"));
        }
        if values.is_empty() {
            return Err(Error::argument("target data needs a nonempty domain"));
        }
        for (i, v) in &values {
            if v.nrows() != m || v.ncols() != m {
                return Err(Error::argument(format!(
                    "target at index {} is {}x{}, expected {m}x{m}",
                    i + 1,
                    v.nrows(),
                    v.ncols()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::argument(format!("target at index {} is not finite", i + 1)));
            }
        }
        Ok(TargetData { m, values })
    }

    /// Scalar targets from `(0-based index, value)` pairs.
    pub fn scalar(values: &[(usize, C64)]) -> Result<Self> {
        Self::new(
            1,
            values.iter().map(|&(i, z)| (i, CMatrix::from_element(1, 1, z))).collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> IndexSet {
        self.values.keys().copied().collect()
    }

    pub fn get(&self, i: usize) -> Option<&CMatrix> {
        self.values.get(&i)
    }

    pub fn values(&self) -> &BTreeMap<usize, CMatrix> {
        &self.values
    }

    /// Scalar value at `i` (for `m = 1`).
    pub fn scalar_at(&self, i: usize) -> Option<C64> {
        self.values.get(&i).map(|v| v[(0, 0)])
    }

    /// Largest operator norm of a target value.
    pub fn max_norm(&self) -> f64 {
        self.values.values().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn with_value(&self, i: usize, value: CMatrix) -> Result<Self> {
        let mut values = self.values.clone();
        values.insert(i, value);
        Self::new(self.m, values)
    }

    pub fn restricted_to(&self, set: &IndexSet) -> Result<Self> {
        Self::new(
            self.m,
            self.values
                .iter()
                .filter(|(i, _)| set.contains(**i))
                .map(|(i, v)| (*i, v.clone()))
                .collect(),
        )
    }

    /// Every value multiplied by the scalar `s`.
    pub fn scaled(&self, s: C64) -> Self {
        TargetData {
            m: self.m,
            values: self.values.iter().map(|(i, v)| (*i, v * s)).collect(),
        }
    }

    /// Index-relabelled copy: the value at `i` moves to `map(i)`.
    pub fn relabelled(&self, map: impl Fn(usize) -> usize) -> Self {
        TargetData {
            m: self.m,
            values: self.values.iter().map(|(i, v)| (map(*i), v.clone())).collect(),
        }
    }
}

impl Serialize for TargetData {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            m: usize,
            values: BTreeMap<usize, Vec<Vec<[f64; 2]>>>,
        }
        Wire {
            m: self.m,
            values: self.values.iter().map(|(i, v)| (i + 1, wire::matrix_to_rows(v))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TargetData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            m: usize,
            // String keys: integer keys do not survive serde's buffering inside tagged enums.
            values: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
        }
        let w = Wire::deserialize(d)?;
        let mut values = BTreeMap::new();
        for (key, rows) in w.values {
            let i = key
                .parse::<usize>()
                .ok()
                .and_then(|i| i.checked_sub(1))
                .ok_or_else(|| D::Error::custom(format!("target index {key:?} is not a positive integer")))?;
            values.insert(i, wire::rows_to_matrix(&rows).map_err(D::Error::custom)?);
        }
        TargetData::new(w.m, values).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelValidation {
    pub hermitian: bool,
    pub hermitian_defect: f64,
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub support: IndexSet,
    pub pd_on_support: bool,
    pub min_eigenvalue_on_support: Option<f64>,
    /// All three conditions: Hermitian, PSD, positive definite on the support.
    pub is_kernel: bool,
}

pub fn support(kernel: &DiscreteKernel) -> IndexSet {
    kernel.support()
}

pub fn validate_kernel(kernel: &DiscreteKernel) -> KernelValidation {
    let g = kernel.entries();
    let scale = linalg::spectral_norm(g);
    let hermitian_defect = linalg::max_abs(&(g - g.adjoint()));
    let hermitian = hermitian_defect <= HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
    let min_eigenvalue = linalg::min_eigenvalue(g);
    let psd = min_eigenvalue >= -PSD_TOL * scale;
    let support = kernel.support();
    let idx = support.to_vec();
    let min_eigenvalue_on_support = (!idx.is_empty()).then(|| linalg::min_eigenvalue(&kernel.submatrix(&idx, &idx)));
    let pd_on_support = min_eigenvalue_on_support.is_none_or(|lam| lam > PD_TOL * scale);
    KernelValidation {
        hermitian,
        hermitian_defect,
        psd,
        min_eigenvalue,
        support,
        pd_on_support,
        min_eigenvalue_on_support,
        is_kernel: hermitian && psd && pd_on_support,
    }
}

/// Coefficient-space realization of `T_{g,z}(I₁)`.
#[derive(Debug, Clone)]
pub struct MultiplierOperator {
    kernel: DiscreteKernel,
    target: TargetData,
    inner: IndexSet,
    outer: IndexSet,
    /// Point index of each slot block: removed points (`I₁∖I₀` on the support) first, then kept ones.
    slot_points: Vec<usize>,
    removed: usize,
    gram: CMatrix,
    action: CMatrix,
    /// Columns are the Gram-orthonormal basis of `H(I₀, I₁)` in slot coordinates.
    basis: CMatrix,
    /// Matrix of `T` in the full orthonormal basis of `H(I₁)`.
    orthonormal: CMatrix,
    compressed: CMatrix,
}

impl MultiplierOperator {
    pub fn kernel(&self) -> &DiscreteKernel {
        &self.kernel
    }

    pub fn target(&self) -> &TargetData {
        &self.target
    }

    pub fn m(&self) -> usize {
        self.target.m()
    }

    /// `(I₀, I₁)`.
    pub fn scope(&self) -> (&IndexSet, &IndexSet) {
        (&self.inner, &self.outer)
    }

    pub fn is_compressed(&self) -> bool {
        self.removed > 0
    }

    /// Point index of each slot block of the coefficient coordinates.
    pub fn slot_points(&self) -> &[usize] {
        &self.slot_points
    }

    /// Coefficient Gram form over all slots of `H(I₁)`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Block-diagonal action `z̃(i)*` over all slots of `H(I₁)`.
    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// The operator on `H(I₀, I₁)` in the orthonormal basis [`Self::basis`].
    pub fn compressed(&self) -> &CMatrix {
        &self.compressed
    }

    /// Dimension of `H(I₀, I₁)`.
    pub fn dim(&self) -> usize {
        self.compressed.nrows()
    }

    /// Applies the uncompressed action to a coefficient vector over all slots.
    pub fn apply(&self, coefficients: &CVector) -> CVector {
        &self.action * coefficients
    }

    /// Norm of `T` on the whole of `H(I₁)` (the extended operator, before compressing).
    pub fn extended_norm(&self) -> f64 {
        norm_of_orthonormal_matrix(&self.orthonormal)
    }
}

/// `T_{g,z}(I₁)` built with the zero extension of `z` to `I₁`.
pub fn build_operator(kernel: &DiscreteKernel, target: &TargetData, outer: &IndexSet) -> Result<MultiplierOperator> {
    build_operator_extended(kernel, target, outer, None)
}

/// Uncompressed `T_{g,z}` on `H(I)`, `I` the target domain.
pub fn uncompressed_operator(kernel: &DiscreteKernel, target: &TargetData) -> Result<MultiplierOperator> {
    build_operator(kernel, target, &target.domain())
}

/// `T_{g,z}(I₁)` built from the extension `z̃ = z` on `I₀`, `extension` on `I₁∖I₀` (zero where absent).
pub fn build_operator_extended(
    kernel: &DiscreteKernel,
    target: &TargetData,
    outer: &IndexSet,
    extension: Option<&TargetData>,
) -> Result<MultiplierOperator> {
    let inner = target.domain();
    let m = target.m();
    if !inner.is_subset(outer) {
        return Err(Error::argument(format!("target domain {inner} is not contained in {outer}")));
    }
    if outer.largest().is_some_and(|i| i >= kernel.n()) {
        return Err(Error::argument(format!("index set {outer} exceeds n = {}", kernel.n())));
    }
    if let Some(ext) = extension {
        if ext.m() != m {
            return Err(Error::argument("extension block size differs from target"));
        }
    }
    let spt = kernel.support();
    let removed_pts = outer.difference(&inner).intersection(&spt).to_vec();
    let kept_pts = inner.intersection(&spt).to_vec();
    let slot_points: Vec<usize> = removed_pts.iter().chain(&kept_pts).copied().collect();
    let removed = removed_pts.len() * m;
    let dim = slot_points.len() * m;

    let gram = kernel.coefficient_gram(&slot_points, m);
    let zero = CMatrix::zeros(m, m);
    let mut action = CMatrix::zeros(dim, dim);
    for (b, &i) in slot_points.iter().enumerate() {
        let value = target
            .get(i)
            .or_else(|| extension.and_then(|e| e.get(i)))
            .unwrap_or(&zero);
        action.view_mut((b * m, b * m), (m, m)).copy_from(&value.adjoint());
    }

    let (basis, orthonormal) = if dim == 0 {
        (CMatrix::zeros(0, 0), CMatrix::zeros(0, 0))
    } else {
        linalg::check_condition(&gram)?;
        let l = linalg::cholesky_lower(&gram)?;
        // Columns of L⁻* are the Gram–Schmidt orthonormalization of the slots in order.
        let inv_adj = linalg::solve_lower_adjoint(&l, &CMatrix::identity(dim, dim));
        let orthonormal = l.adjoint() * (&action * &inv_adj);
        (inv_adj.columns(removed, dim - removed).into_owned(), orthonormal)
    };
    let compressed = orthonormal
        .view((removed, removed), (dim - removed, dim - removed))
        .into_owned();

    Ok(MultiplierOperator {
        kernel: kernel.clone(),
        target: target.clone(),
        inner,
        outer: outer.clone(),
        slot_points,
        removed,
        gram,
        action,
        basis,
        orthonormal,
        compressed,
    })
}

fn norm_of_orthonormal_matrix(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    linalg::max_eigenvalue(&(m.adjoint() * m)).max(0.0).sqrt()
}

/// Norm of the (possibly compressed) operator with respect to the Gram inner product.
///
/// Equals the square root of the top eigenvalue of the pencil `(A*ĜA, Ĝ)`
/// restricted to `H(I₀, I₁)`; in the Cholesky-orthonormal basis that pencil
/// is the standard Hermitian matrix `M*M`.
pub fn operator_norm(op: &MultiplierOperator) -> f64 {
    norm_of_orthonormal_matrix(&op.compressed)
}

/// Largest entrywise discrepancy between compressions built from different extensions,
/// relative to `max(1, |entries of the zero-extension compression|)`.
pub fn compression_discrepancy(reference: &MultiplierOperator, other: &MultiplierOperator) -> f64 {
    if reference.compressed.shape() != other.compressed.shape() {
        return f64::INFINITY;
    }
    if reference.compressed.is_empty() {
        return 0.0;
    }
    let scale = linalg::max_abs(&reference.compressed).max(1.0);
    linalg::max_abs(&(&reference.compressed - &other.compressed)) / scale
}

/// Builds the compression with the zero extension and with `trials` random
/// extensions, reporting the largest realization discrepancy.
pub fn check_extension_independence(
    kernel: &DiscreteKernel,
    target: &TargetData,
    outer: &IndexSet,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    let reference = build_operator(kernel, target, outer)?;
    let free = outer.difference(&target.domain());
    let m = target.m();
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .map(|trial| {
            let mut rng = sampling::trial_rng(seed, trial);
            let values: BTreeMap<usize, CMatrix> = free
                .iter()
                .map(|i| (i, sampling::gaussian_matrix(&mut rng, m).scale(1.0 + 2.0 * rng.random::<f64>())))
                .collect();
            if values.is_empty() {
                return TrialOutcome::Done {
                    margin: EXTENSION_TOL,
                    violation: None,
                };
            }
            let extension = TargetData::new(m, values).expect("random extension is well formed");
            match build_operator_extended(kernel, target, outer, Some(&extension)) {
                Ok(op) => {
                    let gap = compression_discrepancy(&reference, &op);
                    TrialOutcome::Done {
                        margin: EXTENSION_TOL - gap,
                        violation: (gap >= EXTENSION_TOL).then(|| Violation {
                            trial,
                            instance: Instance::Extension {
                                outer: outer.clone(),
                                target: target.clone(),
                                extension,
                            },
                            lhs: gap,
                            rhs: 0.0,
                            gap,
                        }),
                    }
                }
                Err(e) => TrialOutcome::Skipped(crate::report::skip_reason(&e)),
            }
        })
        .collect();
    let builder = ReportBuilder {
        audit: "extension-independence".into(),
        kernel: AuditKernel::Discrete(kernel.clone()),
        n: kernel.n(),
        m,
        seed,
        tolerances: BTreeMap::from([("discrepancy".to_string(), EXTENSION_TOL)]),
    };
    Ok(builder.finish(outcomes, true, Vec::new()))
}

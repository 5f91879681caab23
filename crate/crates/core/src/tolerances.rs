//! Numerical thresholds shared across the crate.
//!
//! Relative thresholds are scaled by the spectral norm (or largest diagonal
//! entry) of the matrix under test.

/// Boundary margin for domain membership.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// Minimum distance between two points of a Gram point set.
pub const POINT_SEPARATION: f64 = 1e-9;

/// Largest accepted condition estimate of a Gram form.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative threshold on `|g(i,i)|` for membership in the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Relative threshold for positive definiteness of a kernel on its support.
pub const PD_TOL: f64 = 1e-10;

/// Relative threshold for positive semidefiniteness of Pick and Gram forms.
pub const PSD_TOL: f64 = 1e-11;

/// Relative threshold for Hermitian symmetry checks on input matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues of a Schur block below this fraction of the largest are zero.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Largest relative residual accepted when projecting onto a range.
pub const RANGE_RESIDUAL: f64 = 1e-8;

/// Absolute stopping width for bisection on the level `t`.
pub const BISECTION_TOL: f64 = 1e-9;

/// Cap on the doubled upper bracket when searching for a feasible level.
pub const BISECTION_CAP: f64 = (1u64 << 20) as f64;

/// Relative discrepancy allowed between compressions built from different extensions.
pub const EXTENSION_TOL: f64 = 1e-10;

/// Localization audit: a violation needs `lhs > rhs + LOCALIZATION_TOL * (1 + rhs)`.
pub const LOCALIZATION_TOL: f64 = 1e-8;

/// Permuting the points may shift Pick margins by at most this much (relative).
pub const PERMUTATION_TOL: f64 = 1e-10;

/// Relative deviation allowed in the ball rigidity identity.
pub const RIGIDITY_TOL: f64 = 1e-11;

/// Radius of the disc/ball from which audits sample points.
pub const SAMPLE_RADIUS: f64 = 0.9;

/// Operator-norm cap on random audit targets.
pub const TARGET_NORM_CAP: f64 = 0.95;

/// Order used when an audit asks whether a kernel carries the series certificate.
pub const CERTIFICATE_ORDER: usize = 64;

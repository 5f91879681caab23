//! Numerical Nevanlinna–Pick interpolation in reproducing kernel Hilbert spaces.
//!
//! * [`kernels`]: holomorphic kernel catalog, Gram matrices.
//! * [`series`]: exact reciprocal diagonal series (the `aₙ` certificate).
//! * [`discrete`]: kernels on `{1..n}`, multiplier adjoints `T_{g,z}` and their compressions.
//! * [`pick`]: Pick matrices, solvability, one-point admissible discs, minimal extensions.
//! * [`audit`]: seeded property audits and the ball computations.
//! * [`cli`]: the `nevpick` command line.

pub mod audit;
pub mod cli;
pub mod discrete;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod pick;
pub mod report;
pub mod sampling;
pub mod search;
pub mod series;
pub mod tolerances;
pub mod wire;

pub use discrete::{
    build_operator, build_operator_extended, check_extension_independence, operator_norm, support,
    uncompressed_operator, validate_kernel, DiscreteKernel, KernelValidation, MultiplierOperator, TargetData,
};
pub use error::{Error, Result};
pub use kernels::{eval_kernel, gram_matrix, GramMatrix, KernelSpec, Point};
pub use pick::{
    is_solvable, minimal_extension_norm, one_point_disc, pick_check, pick_matrix, AdmissibleDisc, ExtensionMode,
    ExtensionResult, PickMatrix, SearchOptions, Solvability,
};
pub use report::{AuditReport, Verdict};
pub use series::{inverse_kernel_series, InverseSeries};
pub use wire::IndexSet;

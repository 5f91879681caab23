//! Seeded audits of the interpolation properties, plus the exact ball computations.
//!
//! Audits run trials in parallel; trial `k` draws only from its own random
//! stream and results are merged in trial order, so a report depends only on
//! its inputs and seed.

mod ball;
mod certificate;
mod localization;
mod reduction;

pub use ball::{
    ball_monomial_norms, ball_rigidity_check, ball_separation, rigidity_deviation, rigidity_sides, MonomialNorms, SeparationRow,
    Value,
};
pub use certificate::{np_certificate, kernel_is_certified, CertificateReport, CertificateVerdict, NegativeCoefficient};
pub use localization::{audit_greedy_extension, audit_localization, localization_sides};
pub use reduction::{audit_reduction, audit_reduction_on};

use crate::discrete::{build_operator_extended, compression_discrepancy, build_operator, DiscreteKernel};
use crate::error::{Error, Result};
use crate::kernels::gram_matrix;
use crate::report::{AuditKernel, Instance, Violation};

/// Re-evaluates a listed violation and returns its gap.
pub fn replay_violation(kernel: &AuditKernel, violation: &Violation) -> Result<f64> {
    match (&violation.instance, kernel) {
        (Instance::Localization { points, inner: _, outer, target }, _) => {
            let g = instance_kernel(kernel, points.as_deref())?;
            let (lhs, rhs) = localization_sides(&g, target, outer)?;
            Ok(lhs - rhs)
        }
        (Instance::Extension { outer, target, extension }, AuditKernel::Discrete(g)) => {
            let reference = build_operator(g, target, outer)?;
            let other = build_operator_extended(g, target, outer, Some(extension))?;
            Ok(compression_discrepancy(&reference, &other))
        }
        (Instance::Reduction { points, target, permutation }, AuditKernel::Catalog(spec)) => {
            reduction::margin_shift(spec, points, target, permutation).map(|(a, b)| (a - b).abs())
        }
        (Instance::Rigidity { point }, AuditKernel::Catalog(spec)) => rigidity_deviation(spec, point),
        _ => Err(Error::argument("violation instance does not match the audit kernel")),
    }
}

fn instance_kernel(kernel: &AuditKernel, points: Option<&[crate::kernels::Point]>) -> Result<DiscreteKernel> {
    match (kernel, points) {
        (AuditKernel::Discrete(g), _) => Ok(g.clone()),
        (AuditKernel::Catalog(spec), Some(points)) => Ok(DiscreteKernel::from_gram(&gram_matrix(spec, points)?)),
        (AuditKernel::Catalog(_), None) => Err(Error::argument("catalog instance is missing its points")),
    }
}

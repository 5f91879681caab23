use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::Result;
use crate::kernels::KernelSpec;
use crate::report::REPORT_SCHEMA;
use crate::series::inverse_kernel_series;
use crate::tolerances::CERTIFICATE_ORDER;
use crate::wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeCoefficient {
    /// 1-based `n` of the first negative `aₙ`.
    pub index: usize,
    #[serde(with = "wire::rational")]
    pub value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub schema: &'static str,
    pub kernel: KernelSpec,
    pub order: usize,
    #[serde(with = "wire::rational_vec")]
    pub coefficients: Vec<BigRational>,
    pub verdict: CertificateVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_negative: Option<NegativeCoefficient>,
}

/// Checks `aₙ ≥ 0` for `n ≤ order` in `k₀/k = 1 − Σ aₙ xⁿ`, exactly.
pub fn np_certificate(spec: &KernelSpec, order: usize) -> Result<CertificateReport> {
    let series = inverse_kernel_series(spec, order)?;
    let first_negative = series
        .coefficients
        .iter()
        .position(|a| a.is_negative())
        .map(|k| NegativeCoefficient {
            index: k + 1,
            value: series.coefficients[k].clone(),
        });
    Ok(CertificateReport {
        schema: REPORT_SCHEMA,
        kernel: *spec,
        order,
        verdict: if first_negative.is_none() {
            CertificateVerdict::Pass
        } else {
            CertificateVerdict::Fail
        },
        first_negative,
        coefficients: series.coefficients,
    })
}

/// Whether the kernel passes the certificate to the audit order.
pub fn kernel_is_certified(spec: &KernelSpec) -> bool {
    np_certificate(spec, CERTIFICATE_ORDER).is_ok_and(|r| r.verdict == CertificateVerdict::Pass)
}

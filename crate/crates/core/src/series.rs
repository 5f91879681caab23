//! Reciprocals of power series with nonzero constant term.
//!
//! For a kernel with diagonal series `k(x) = Σ kₙ xⁿ`, the normalized
//! reciprocal is written `k₀/k(x) = 1 − Σ_{n≥1} aₙ xⁿ`. Nonnegativity of every
//! `aₙ` is the certificate checked by the audits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::wire;

/// Coefficients `b₀ … b_order` of `1/c(x)`, by the recurrence `Σ_{m≤n} c_m b_{n−m} = δ_{n0}`.
pub fn reciprocal_exact(c: &[BigRational], order: usize) -> Result<Vec<BigRational>> {
    let c0 = c.first().filter(|c0| !c0.is_zero()).ok_or_else(|| {
        Error::argument("reciprocal needs a nonzero constant term")
    })?;
    let mut b: Vec<BigRational> = Vec::with_capacity(order + 1);
    b.push(c0.recip());
    for n in 1..=order {
        let mut acc = BigRational::zero();
        for m in 1..=n.min(c.len() - 1) {
            acc += &c[m] * &b[n - m];
        }
        b.push(-acc / c0);
    }
    Ok(b)
}

/// Floating-point counterpart of [`reciprocal_exact`].
pub fn reciprocal_f64(c: &[f64], order: usize) -> Result<Vec<f64>> {
    let c0 = match c.first() {
        Some(&c0) if c0 != 0.0 && c0.is_finite() => c0,
        _ => return Err(Error::argument("reciprocal needs a finite nonzero constant term")),
    };
    let mut b = Vec::with_capacity(order + 1);
    b.push(1.0 / c0);
    for n in 1..=order {
        let acc: f64 = (1..=n.min(c.len() - 1)).map(|m| c[m] * b[n - m]).sum();
        b.push(-acc / c0);
    }
    Ok(b)
}

/// Cauchy product truncated to `len` terms.
pub fn convolve_exact(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|n| {
            (0..=n)
                .filter(|&m| m < a.len() && n - m < b.len())
                .map(|m| &a[m] * &b[n - m])
                .fold(BigRational::zero(), |acc, t| acc + t)
        })
        .collect()
}

/// `a₁ … a_order` with `k₀/k(x) = 1 − Σ aₙ xⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseSeries {
    pub kernel: KernelSpec,
    /// `k₀`, the factor divided out before inverting.
    #[serde(with = "wire::rational")]
    pub normalization: BigRational,
    #[serde(with = "wire::rational_vec")]
    pub coefficients: Vec<BigRational>,
}

impl InverseSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `aₙ` for 1-based `n`.
    pub fn a(&self, n: usize) -> &BigRational {
        &self.coefficients[n - 1]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

pub fn inverse_kernel_series(spec: &KernelSpec, order: usize) -> Result<InverseSeries> {
    if order < 1 {
        return Err(Error::argument("series order must be at least 1"));
    }
    let k = spec
        .diagonal_series(order + 1)
        .ok_or_else(|| Error::argument(format!("{spec} has no one-variable diagonal series")))?;
    let k0 = k[0].clone();
    let normalized: Vec<BigRational> = k.iter().map(|kn| kn / &k0).collect();
    let b = reciprocal_exact(&normalized, order)?;
    debug_assert_eq!(b[0], BigRational::from_integer(BigInt::from(1)));
    Ok(InverseSeries {
        kernel: *spec,
        normalization: k0,
        coefficients: b[1..].iter().map(|bn| -bn).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn dirichlet_first_coefficients() {
        let s = inverse_kernel_series(&KernelSpec::dirichlet(), 3).unwrap();
        assert_eq!(s.coefficients, vec![q(1, 2), q(1, 12), q(1, 24)]);
    }

    #[test]
    fn szego_and_bergman_closed_forms() {
        let s = inverse_kernel_series(&KernelSpec::szego(), 3).unwrap();
        assert_eq!(s.coefficients, vec![q(1, 1), q(0, 1), q(0, 1)]);
        let b = inverse_kernel_series(&KernelSpec::bergman(), 2).unwrap();
        assert_eq!(b.coefficients, vec![q(2, 1), q(-1, 1)]);
        let da = inverse_kernel_series(&KernelSpec::drury_arveson(3).unwrap(), 2).unwrap();
        assert_eq!(da.coefficients, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn order_zero_is_rejected() {
        assert!(matches!(inverse_kernel_series(&KernelSpec::szego(), 0), Err(Error::Argument(_))));
        assert!(inverse_kernel_series(&KernelSpec::polydisc(2).unwrap(), 3).is_err());
    }

    #[test]
    fn non_unit_constant_term_is_normalized() {
        // 2 + 2x has normalized reciprocal 1/(1 + x) = 1 − x + x² − …, so a = (1, −1, 1).
        let c = vec![q(2, 1), q(2, 1)];
        let b = reciprocal_exact(&c, 3).unwrap();
        assert_eq!(b, vec![q(1, 2), q(-1, 2), q(1, 2), q(-1, 2)]);
    }

    #[test]
    fn float_mode_matches_exact_mode() {
        let spec = KernelSpec::dirichlet();
        let exact = inverse_kernel_series(&spec, 20).unwrap().to_f64();
        let c: Vec<f64> = (0..=20).map(|n| spec.diagonal_coefficient_f64(n)).collect();
        let b = reciprocal_f64(&c, 20).unwrap();
        for (n, a) in exact.iter().enumerate() {
            assert!((a + b[n + 1]).abs() < 1e-15);
        }
    }
}

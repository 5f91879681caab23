//! Monomials in the Drury–Arveson space versus the sup norm on the ball, and
//! the diagonal rigidity identity `k_λ(λ) = |k₀(λ)|²/k₀(0) · 1/(1 − |λ|²)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::{Domain, KernelSpec, Point};
use crate::report::{AuditKernel, AuditReport, Instance, ReportBuilder, TrialOutcome, Violation};
use crate::sampling;
use crate::tolerances::{RIGIDITY_TOL, SAMPLE_RADIUS};
use crate::wire;

/// Largest `n₁ + n₂` evaluated in exact arithmetic.
const EXACT_LIMIT: usize = 500;

/// An exact rational (`"p/q"` on the wire) or a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Float(_) => None,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Exact(q) => f.write_str(&wire::rational_to_string(q)),
            Value::Float(x) => write!(f, "{x:.17e}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(q) => wire::rational::serialize(q, s),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Exact(String),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Exact(s) => wire::parse_rational(&s).map(Value::Exact).map_err(serde::de::Error::custom),
            Raw::Float(x) => Ok(Value::Float(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialNorms {
    pub n1: usize,
    pub n2: usize,
    /// `‖zⁿ‖² = 1/C(n₁+n₂, n₂)`.
    pub hilbert_norm_sq: Value,
    /// `sup_B |zⁿ|² = (n₁/|n|)^{n₁} (n₂/|n|)^{n₂}`.
    pub sup_norm_sq: Value,
    /// `(‖z²ⁿ‖²/‖zⁿ‖²) / sup_B |zⁿ|²`, a lower bound for the squared multiplier-to-sup norm ratio.
    pub ratio: Value,
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

pub fn ball_monomial_norms(n1: usize, n2: usize) -> Result<MonomialNorms> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::argument("monomial exponents must be at least 1"));
    }
    let total = n1 + n2;
    if total <= EXACT_LIMIT {
        let int = |v: usize| BigInt::from(v);
        let hilbert = BigRational::new(BigInt::one(), binomial(total, n2));
        let sup = BigRational::new(
            Pow::pow(int(n1), n1) * Pow::pow(int(n2), n2),
            Pow::pow(int(total), total),
        );
        let quotient = BigRational::new(binomial(total, n1), binomial(2 * total, 2 * n1));
        Ok(MonomialNorms {
            n1,
            n2,
            ratio: Value::Exact(quotient / &sup),
            hilbert_norm_sq: Value::Exact(hilbert),
            sup_norm_sq: Value::Exact(sup),
        })
    } else {
        let (a, b, t) = (n1 as f64, n2 as f64, total as f64);
        let ln_sup = a * (a / t).ln() + b * (b / t).ln();
        let ln_ratio = ln_binomial(total, n1) - ln_binomial(2 * total, 2 * n1) - ln_sup;
        Ok(MonomialNorms {
            n1,
            n2,
            hilbert_norm_sq: Value::Float((-ln_binomial(total, n2)).exp()),
            sup_norm_sq: Value::Float(ln_sup.exp()),
            ratio: Value::Float(ln_ratio.exp()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub j: usize,
    pub ratio: Value,
}

/// Ratios for `n₁ = n₂ = j`, `j = 1..=jmax`.
pub fn ball_separation(jmax: usize) -> Result<Vec<SeparationRow>> {
    (1..=jmax)
        .map(|j| ball_monomial_norms(j, j).map(|r| SeparationRow { j, ratio: r.ratio }))
        .collect()
}

/// Both sides of the diagonal identity at `point`: `k_λ(λ)` and `|k₀(λ)|²/k₀(0) · 1/(1 − |λ|²)`.
pub fn rigidity_sides(spec: &KernelSpec, point: &Point) -> Result<(f64, f64)> {
    if !matches!(spec.domain(), Domain::Ball(_)) {
        return Err(Error::argument(format!("{spec} is not a kernel on the ball")));
    }
    let origin = Point::new(vec![Default::default(); spec.dim()]);
    let diag = spec.eval(point, point)?.re;
    let k00 = spec.eval(&origin, &origin)?.re;
    let k0 = spec.eval(&origin, point)?;
    let rhs = k0.norm_sqr() / k00 / (1.0 - point.norm().powi(2));
    Ok((diag, rhs))
}

/// Relative deviation of the diagonal identity at `point`.
pub fn rigidity_deviation(spec: &KernelSpec, point: &Point) -> Result<f64> {
    let (lhs, rhs) = rigidity_sides(spec, point)?;
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Samples interior points of the ball and checks the diagonal rigidity identity.
pub fn ball_rigidity_check(spec: &KernelSpec, samples: usize, seed: u64) -> Result<AuditReport> {
    if !matches!(spec.domain(), Domain::Ball(_)) {
        return Err(Error::argument(format!("{spec} is not a kernel on the ball")));
    }
    let outcomes: Vec<TrialOutcome> = (0..samples)
        .into_par_iter()
        .map(|trial| {
            let mut rng = sampling::trial_rng(seed, trial);
            let point = sampling::random_point(&mut rng, spec.domain(), SAMPLE_RADIUS);
            match rigidity_sides(spec, &point) {
                Ok((lhs, rhs)) => {
                    let dev = (lhs - rhs).abs() / rhs.abs();
                    TrialOutcome::Done {
                        margin: -dev,
                        violation: (dev >= RIGIDITY_TOL).then_some(Violation {
                            trial,
                            lhs,
                            rhs,
                            gap: dev,
                            instance: Instance::Rigidity { point },
                        }),
                    }
                }
                Err(e) => TrialOutcome::Skipped(crate::report::skip_reason(&e)),
            }
        })
        .collect();
    let builder = ReportBuilder {
        audit: "ball-rigidity".into(),
        kernel: AuditKernel::Catalog(*spec),
        n: 1,
        m: 1,
        seed,
        tolerances: BTreeMap::from([
            ("relative_deviation".to_string(), RIGIDITY_TOL),
            ("sample_radius".to_string(), SAMPLE_RADIUS),
        ]),
    };
    Ok(builder.finish(outcomes, true, Vec::new()))
}

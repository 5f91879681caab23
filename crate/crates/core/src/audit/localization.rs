use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::discrete::{build_operator, operator_norm, uncompressed_operator, DiscreteKernel, TargetData};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, Point};
use crate::pick::{minimal_extension_norm, ExtensionMode, SearchOptions};
use crate::report::{skip_reason, AuditKernel, AuditReport, Instance, ReportBuilder, TrialOutcome, Violation};
use crate::sampling;
use crate::tolerances::{LOCALIZATION_TOL, SAMPLE_RADIUS, TARGET_NORM_CAP};
use crate::wire::IndexSet;

use super::certificate::kernel_is_certified;

/// `(‖T_{g,z}(I₁)‖, ‖T_{g,z}‖)` for `z` on `I₀` and `outer = I₁`.
pub fn localization_sides(kernel: &DiscreteKernel, target: &TargetData, outer: &IndexSet) -> Result<(f64, f64)> {
    let lhs = operator_norm(&build_operator(kernel, target, outer)?);
    let rhs = operator_norm(&uncompressed_operator(kernel, target)?);
    Ok((lhs, rhs))
}

fn trial_kernel(kernel: &AuditKernel, n: usize, rng: &mut impl Rng) -> Result<(DiscreteKernel, Option<Vec<Point>>)> {
    match kernel {
        AuditKernel::Discrete(g) => Ok((g.clone(), None)),
        AuditKernel::Catalog(spec) => {
            let points = sampling::random_points(rng, spec.domain(), SAMPLE_RADIUS, n);
            let g = DiscreteKernel::from_gram(&gram_matrix(spec, &points)?);
            Ok((g, Some(points)))
        }
    }
}

fn random_targets(rng: &mut impl Rng, indices: &IndexSet, m: usize) -> TargetData {
    TargetData::new(
        m,
        indices
            .iter()
            .map(|i| (i, sampling::random_contraction(rng, m, TARGET_NORM_CAP)))
            .collect(),
    )
    .expect("random targets are well formed")
}

fn localization_trial(kernel: &AuditKernel, n: usize, m: usize, seed: u64, trial: usize) -> TrialOutcome {
    let mut rng = sampling::trial_rng(seed, trial);
    let (g, points) = match trial_kernel(kernel, n, &mut rng) {
        Ok(x) => x,
        Err(e) => return TrialOutcome::Skipped(skip_reason(&e)),
    };
    let size = rng.random_range(2..=n);
    let outer: IndexSet = sampling::random_subset(&mut rng, n, size).into_iter().collect();
    let removed = outer.to_vec()[rng.random_range(0..size)];
    let mut inner = outer.clone();
    inner.remove(removed);
    let target = random_targets(&mut rng, &inner, m);
    match localization_sides(&g, &target, &outer) {
        Ok((lhs, rhs)) => {
            let gap = lhs - rhs;
            TrialOutcome::Done {
                margin: rhs - lhs,
                violation: (gap > LOCALIZATION_TOL * (1.0 + rhs)).then_some(Violation {
                    trial,
                    instance: Instance::Localization {
                        points,
                        inner,
                        outer,
                        target,
                    },
                    lhs,
                    rhs,
                    gap,
                }),
            }
        }
        Err(e) => TrialOutcome::Skipped(skip_reason(&e)),
    }
}

fn check_sizes(kernel: &AuditKernel, n: usize, m: usize) -> Result<usize> {
    let n = match kernel {
        AuditKernel::Discrete(g) => g.n(),
        AuditKernel::Catalog(_) => n,
    };
    if n < 2 {
        return Err(Error::argument("localization audits need n ≥ 2"));
    }
    if m < 1 {
        return Err(Error::argument("block size m must be positive"));
    }
    Ok(n)
}

/// Searches for `‖T_{g,z}(I₁)‖ > ‖T_{g,z}‖` with `|I₁∖I₀| = 1`.
///
/// A clean run is only a pass for catalog kernels carrying the series
/// certificate; otherwise it is inconclusive, since random search cannot
/// prove the inequality.
pub fn audit_localization(kernel: &AuditKernel, n: usize, m: usize, trials: usize, seed: u64) -> Result<AuditReport> {
    let n = check_sizes(kernel, n, m)?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|trial| localization_trial(kernel, n, m, seed, trial))
        .collect();
    let certified = matches!(kernel, AuditKernel::Catalog(spec) if kernel_is_certified(spec));
    let mut notes = Vec::new();
    if !certified {
        notes.push("kernel has no series certificate: zero violations would not prove localization".to_string());
    }
    let builder = ReportBuilder {
        audit: "localization".into(),
        kernel: kernel.clone(),
        n,
        m,
        seed,
        tolerances: BTreeMap::from([
            ("gap".to_string(), LOCALIZATION_TOL),
            ("sample_radius".to_string(), SAMPLE_RADIUS),
            ("target_norm_cap".to_string(), TARGET_NORM_CAP),
        ]),
    };
    Ok(builder.finish(outcomes, certified, notes))
}

/// Greedy extension from `known` random indices to all `n`: a violation is a final norm above
/// `‖T_{g,z}‖ + tol`. Scalar targets only.
pub fn audit_greedy_extension(
    kernel: &AuditKernel,
    n: usize,
    known: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    let n = check_sizes(kernel, n, 1)?;
    if known == 0 || known >= n {
        return Err(Error::argument("need 0 < known < n"));
    }
    let universe = IndexSet::range(n);
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = sampling::trial_rng(seed, trial);
            let (g, points) = match trial_kernel(kernel, n, &mut rng) {
                Ok(x) => x,
                Err(e) => return TrialOutcome::Skipped(skip_reason(&e)),
            };
            let inner: IndexSet = sampling::random_subset(&mut rng, n, known).into_iter().collect();
            let target = random_targets(&mut rng, &inner, 1);
            match minimal_extension_norm(&g, &target, &universe, ExtensionMode::GreedySequential, SearchOptions::default()) {
                Ok(res) => {
                    let gap = res.achieved_norm - res.lower_bound;
                    TrialOutcome::Done {
                        margin: tol - gap,
                        violation: (gap > tol).then(|| Violation {
                            trial,
                            instance: Instance::Localization {
                                points,
                                inner,
                                outer: universe.clone(),
                                target: res.extension.clone(),
                            },
                            lhs: res.achieved_norm,
                            rhs: res.lower_bound,
                            gap,
                        }),
                    }
                }
                Err(e) => TrialOutcome::Skipped(skip_reason(&e)),
            }
        })
        .collect();
    let certified = matches!(kernel, AuditKernel::Catalog(spec) if kernel_is_certified(spec));
    let builder = ReportBuilder {
        audit: "greedy-extension".into(),
        kernel: kernel.clone(),
        n,
        m: 1,
        seed,
        tolerances: BTreeMap::from([("norm_increase".to_string(), tol)]),
    };
    Ok(builder.finish(outcomes, certified, Vec::new()))
}

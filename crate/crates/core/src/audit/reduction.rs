use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::discrete::{DiscreteKernel, TargetData};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec, Point};
use crate::pick::is_solvable;
use crate::report::{skip_reason, AuditKernel, AuditReport, Instance, ReportBuilder, TrialOutcome, Violation};
use crate::sampling;
use crate::tolerances::{PERMUTATION_TOL, SAMPLE_RADIUS};
use crate::wire::IndexSet;

/// Pick margins `(original, permuted)` where `permutation[k]` is the source of permuted point `k`.
pub(crate) fn margin_shift(spec: &KernelSpec, points: &[Point], target: &TargetData, permutation: &[usize]) -> Result<(f64, f64)> {
    let g = DiscreteKernel::from_gram(&gram_matrix(spec, points)?);
    let before = is_solvable(&g, target)?.margin;
    let permuted: Vec<Point> = permutation.iter().map(|&k| points[k].clone()).collect();
    let mut inverse = vec![0; permutation.len()];
    for (k, &src) in permutation.iter().enumerate() {
        inverse[src] = k;
    }
    let gp = DiscreteKernel::from_gram(&gram_matrix(spec, &permuted)?);
    let after = is_solvable(&gp, &target.relabelled(|i| inverse[i]))?.margin;
    Ok((before, after))
}

fn reduction_trial(spec: &KernelSpec, points: Vec<Point>, m: usize, seed: u64, trial: usize) -> TrialOutcome {
    let mut rng = sampling::trial_rng(seed, trial);
    let n = points.len();
    let g = match gram_matrix(spec, &points) {
        Ok(g) => DiscreteKernel::from_gram(&g),
        Err(e) => return TrialOutcome::Skipped(skip_reason(&e)),
    };
    let size = rng.random_range(1..=n);
    let domain: IndexSet = sampling::random_subset(&mut rng, n, size).into_iter().collect();
    let target = TargetData::new(
        m,
        domain.iter().map(|i| (i, sampling::random_contraction(&mut rng, m, 1.0))).collect(),
    )
    .expect("random targets are well formed");
    let permutation = sampling::random_permutation(&mut rng, n);

    let validation = g.validate();
    if !validation.is_kernel {
        let lam = validation.min_eigenvalue_on_support.unwrap_or(validation.min_eigenvalue);
        return TrialOutcome::Done {
            margin: lam,
            violation: Some(Violation {
                trial,
                instance: Instance::Reduction { points, target, permutation },
                lhs: lam,
                rhs: 0.0,
                gap: -lam,
            }),
        };
    }
    match margin_shift(spec, &points, &target, &permutation) {
        Ok((before, after)) => {
            let gap = (before - after).abs();
            let allowed = PERMUTATION_TOL * (1.0 + before.abs());
            TrialOutcome::Done {
                margin: allowed - gap,
                violation: (gap > allowed).then_some(Violation {
                    trial,
                    instance: Instance::Reduction { points, target, permutation },
                    lhs: after,
                    rhs: before,
                    gap,
                }),
            }
        }
        Err(e) => TrialOutcome::Skipped(skip_reason(&e)),
    }
}

fn report(spec: &KernelSpec, n: usize, m: usize, seed: u64, outcomes: Vec<TrialOutcome>) -> AuditReport {
    let builder = ReportBuilder {
        audit: "reduction".into(),
        kernel: AuditKernel::Catalog(*spec),
        n,
        m,
        seed,
        tolerances: BTreeMap::from([
            ("margin_shift".to_string(), PERMUTATION_TOL),
            ("sample_radius".to_string(), SAMPLE_RADIUS),
        ]),
    };
    builder.finish(outcomes, true, Vec::new())
}

/// Checks that Gram matrices of random points are kernels and that Pick verdicts
/// do not depend on the order of the points.
pub fn audit_reduction(spec: &KernelSpec, n: usize, m: usize, trials: usize, seed: u64) -> Result<AuditReport> {
    if n == 0 || m == 0 {
        return Err(Error::argument("need n ≥ 1 and m ≥ 1"));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            // Points come from a stream disjoint from the one the trial itself uses.
            let mut rng = sampling::trial_rng(seed ^ 0x005e_ed0f_9017, trial);
            let points = sampling::random_points(&mut rng, spec.domain(), SAMPLE_RADIUS, n);
            reduction_trial(spec, points, m, seed, trial)
        })
        .collect();
    Ok(report(spec, n, m, seed, outcomes))
}

/// The reduction audit on caller-supplied point sets, one trial each.
pub fn audit_reduction_on(spec: &KernelSpec, point_sets: &[Vec<Point>], m: usize, seed: u64) -> Result<AuditReport> {
    let n = point_sets.first().map_or(0, Vec::len);
    if n == 0 || point_sets.iter().any(|p| p.len() != n) || m == 0 {
        return Err(Error::argument("point sets must be nonempty and of equal size, m ≥ 1"));
    }
    let outcomes = point_sets
        .par_iter()
        .enumerate()
        .map(|(trial, points)| reduction_trial(spec, points.clone(), m, seed, trial))
        .collect();
    Ok(report(spec, n, m, seed, outcomes))
}

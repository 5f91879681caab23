//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use nevpick::audit::{
    self, ball_monomial_norms, ball_rigidity_check, ball_separation, np_certificate, replay_violation, CertificateVerdict,
    Value,
};
use nevpick::discrete::{build_operator, build_operator_extended, check_extension_independence, operator_norm, uncompressed_operator};
use nevpick::linalg::c;
use nevpick::pick::{is_solvable, one_point_disc, pick_check};
use nevpick::report::{AuditKernel, Instance};
use nevpick::{gram_matrix, AuditReport, DiscreteKernel, KernelSpec, Point, TargetData, Verdict};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("1 inverse-series certificates", Duration::from_secs(1), certificate_values),
        ("2 ball monomial separation", Duration::from_secs(1), separation_sweep),
        ("3 norm/Pick bridge", Duration::from_secs(30), norm_pick_bridge),
        ("4 one-point admissible disc", Duration::from_secs(60), disc_oracle),
        ("5 localization audit", Duration::from_secs(120), localization_audit),
        ("6 greedy extension", Duration::from_secs(60), greedy_extension),
        ("7 extension independence", Duration::from_secs(30), extension_independence),
        ("8 rigidity identity", Duration::from_secs(5), rigidity_identity),
        ("9 bergman counterexample search", Duration::from_secs(300), bergman_search),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, check) in criteria {
        if !only.is_empty() && !only.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

/// `(1 − Σ aₙ xⁿ) · Σ kₙ xⁿ = 1` through `x^order`, checked by direct convolution.
fn inverse_identity_holds(spec: &KernelSpec, a: &[BigRational]) -> bool {
    let order = a.len();
    let k = spec.diagonal_series(order + 1).unwrap();
    (0..=order).all(|n| {
        let mut acc = k[n].clone();
        for j in 1..=n {
            acc -= &a[j - 1] * &k[n - j];
        }
        if n == 0 {
            acc.is_one()
        } else {
            acc.is_zero()
        }
    })
}

fn certificate_values() -> Check {
    let dirichlet = np_certificate(&KernelSpec::dirichlet(), 64).map_err(|e| e.to_string())?;
    ensure!(dirichlet.verdict == CertificateVerdict::Pass, "dirichlet certificate did not pass");
    ensure!(dirichlet.coefficients.len() == 64, "dirichlet order is {}", dirichlet.coefficients.len());
    for (n, (p, q)) in [(1, 2), (1, 12), (1, 24)].into_iter().enumerate() {
        ensure!(dirichlet.coefficients[n] == ratio(p, q), "dirichlet a{} = {}", n + 1, dirichlet.coefficients[n]);
    }
    ensure!(
        inverse_identity_holds(&KernelSpec::dirichlet(), &dirichlet.coefficients),
        "dirichlet coefficients do not invert the kernel series"
    );

    let bergman = np_certificate(&KernelSpec::bergman(), 2).map_err(|e| e.to_string())?;
    ensure!(bergman.verdict == CertificateVerdict::Fail, "bergman certificate passed");
    ensure!(bergman.coefficients == vec![ratio(2, 1), ratio(-1, 1)], "bergman coefficients {:?}", bergman.coefficients);
    let neg = bergman.first_negative.as_ref().ok_or("bergman has no negative coefficient")?;
    ensure!(neg.index == 2 && neg.value == ratio(-1, 1), "bergman first negative a{} = {}", neg.index, neg.value);

    for d in 1..=4 {
        let spec = KernelSpec::drury_arveson(d).unwrap();
        let da = np_certificate(&spec, 8).map_err(|e| e.to_string())?;
        ensure!(da.verdict == CertificateVerdict::Pass, "{spec} certificate did not pass");
        ensure!(da.coefficients[0].is_one(), "{spec} a1 = {}", da.coefficients[0]);
        ensure!(da.coefficients[1..].iter().all(Zero::is_zero), "{spec} has nonzero higher coefficients");
    }
    Ok("dirichlet a1..a3 = 1/2, 1/12, 1/24 over 64 terms; bergman a2 = -1; drury-arveson 1, 0, ..., 0".into())
}

fn separation_sweep() -> Check {
    let mut checked = 0;
    for total in 2..=60 {
        for n1 in 1..total {
            let n2 = total - n1;
            let norms = ball_monomial_norms(n1, n2).map_err(|e| e.to_string())?;
            let expected = BigRational::new(factorial(n1) * factorial(n2), factorial(total));
            ensure!(
                norms.hilbert_norm_sq.exact() == Some(&expected),
                "norm of z^({n1},{n2}) is {}, expected {expected}",
                norms.hilbert_norm_sq
            );
            checked += 1;
        }
    }
    let rows = ball_separation(40).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 40, "sweep has {} rows", rows.len());
    let literal = [ratio(4, 3), ratio(48, 35), ratio(1280, 924)];
    for (row, want) in rows.iter().zip(&literal) {
        ensure!(row.ratio.exact() == Some(want), "ratio at j = {} is {}", row.j, row.ratio);
    }
    let mut previous: Option<BigRational> = None;
    for row in &rows {
        let j = row.j;
        // Independent factorial form: C(2j, j) 4^j / C(4j, 2j).
        let c2 = factorial(2 * j) / (factorial(j) * factorial(j));
        let c4 = factorial(4 * j) / (factorial(2 * j) * factorial(2 * j));
        let expected = BigRational::new(c2 * BigInt::from(4).pow(j as u32), c4);
        let got = row.ratio.exact().ok_or(format!("ratio at j = {j} is not exact"))?;
        ensure!(*got == expected, "ratio at j = {j} is {got}, expected {expected}");
        ensure!(*got > BigRational::one(), "ratio at j = {j} is not above 1");
        if let Some(prev) = &previous {
            ensure!(got >= prev, "ratio decreases at j = {j}");
        }
        previous = Some(got.clone());
    }
    let last = match &rows[39].ratio {
        Value::Exact(q) => q.clone(),
        Value::Float(_) => return Err("final ratio is not exact".into()),
    };
    let last_f = Value::Exact(last).to_f64();
    ensure!(last_f > 1.41 && last_f < std::f64::consts::SQRT_2, "final ratio {last_f}");
    Ok(format!("{checked} exact monomial norms; 40 exact ratios, final {last_f:.6}"))
}

fn norm_pick_bridge() -> Check {
    let mut solvable = 0;
    let mut bands = 0;
    for trial in 0..500 {
        let mut rng = rng(3, trial);
        let spec = kernel(BRIDGE_KERNELS[trial % 3]);
        let n = 1 + trial / 3 % 4;
        let m = 1 + trial % 2;
        let (_, g) = random_kernel(&mut rng, &spec, n, 0.9);
        let domain: Vec<usize> = (0..n).collect();
        let cap = uniform(&mut rng, 0.1, 1.6);
        let target = random_target(&mut rng, &domain, m, cap);
        let norm = operator_norm(&uncompressed_operator(&g, &target).map_err(|e| e.to_string())?);
        let verdict = is_solvable(&g, &target).map_err(|e| e.to_string())?;
        if (norm - 1.0).abs() > 1e-8 {
            ensure!(
                verdict.solvable == (norm <= 1.0),
                "trial {trial} ({spec}, n={n}, m={m}): norm {norm} but solvable = {}",
                verdict.solvable
            );
        } else {
            bands += 1;
        }
        solvable += usize::from(verdict.solvable);
        let above = pick_check(&g, &target, norm + 1e-6).map_err(|e| e.to_string())?;
        ensure!(above.solvable, "trial {trial} ({spec}, n={n}, m={m}): not solvable at norm + 1e-6 (margin {:e})", above.margin);
        let below = pick_check(&g, &target, norm - 1e-6).map_err(|e| e.to_string())?;
        ensure!(!below.solvable, "trial {trial} ({spec}, n={n}, m={m}): solvable at norm - 1e-6 (margin {:e})", below.margin);
        let oracle = plain_norm(&g, &target);
        ensure!((oracle - norm).abs() <= 1e-8 * norm.max(1.0), "trial {trial}: norm {norm} vs oracle {oracle}");
    }
    Ok(format!("500 instances, {solvable} solvable at t = 1, {bands} within 1e-8 of the threshold"))
}

/// Scalar instance whose known data has norm `s < 1`, plus one new index.
fn disc_instance(trial: usize) -> (KernelSpec, DiscreteKernel, TargetData, usize) {
    let mut rng = rng(4, trial);
    let spec = kernel(BRIDGE_KERNELS[trial % 3]);
    let known = 1 + trial / 3 % 3;
    let (_, g) = random_kernel(&mut rng, &spec, known + 1, 0.9);
    let domain: Vec<usize> = (0..known).collect();
    let raw = random_target(&mut rng, &domain, 1, 1.0);
    let norm = operator_norm(&uncompressed_operator(&g, &raw).unwrap());
    let s = uniform(&mut rng, 0.2, 0.95);
    let target = raw.scaled(c(s / norm.max(1e-12), 0.0));
    (spec, g, target, known)
}

fn disc_oracle() -> Check {
    let mut inside = 0;
    let mut outside = 0;
    for trial in 0..200 {
        let (spec, g, target, new) = disc_instance(trial);
        let disc = one_point_disc(&g, &target, new, 1.0).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(!disc.empty, "trial {trial} ({spec}): disc is empty below the threshold");
        let half = disc.radius.max(1e-3) * 1.5;
        for a in 0..20 {
            for b in 0..20 {
                let w = disc.center + c(half * (a as f64 / 9.5 - 1.0), half * (b as f64 / 9.5 - 1.0));
                let dist = (w - disc.center).norm();
                if (dist - disc.radius).abs() <= 1e-8 {
                    continue;
                }
                let augmented = target.with_value(new, real_matrix(&[&[0.0]]).map(|_| w)).unwrap();
                let (lo, scale) = pick_oracle_spectrum(&g, &augmented, 1.0);
                if dist < disc.radius {
                    inside += 1;
                    ensure!(lo >= -1e-8 * scale, "trial {trial} ({spec}): w = {w} inside but min eig {lo:e}");
                } else {
                    outside += 1;
                    ensure!(lo < 0.0, "trial {trial} ({spec}): w = {w} outside but min eig {lo:e}");
                }
            }
        }
    }
    for r in [0.1, 0.5, 0.9] {
        let g = DiscreteKernel::from_gram(&gram_matrix(&KernelSpec::szego(), &[Point::real(0.0), Point::real(r)]).unwrap());
        let disc = one_point_disc(&g, &scalar_target(&[(0, c(0.0, 0.0))]), 1, 1.0).map_err(|e| e.to_string())?;
        ensure!(disc.center.norm() <= 1e-10, "schwarz r = {r}: center {}", disc.center);
        ensure!((disc.radius - r).abs() <= 1e-10, "schwarz r = {r}: radius {}", disc.radius);
    }
    Ok(format!("{inside} interior and {outside} exterior samples agree; schwarz radii exact"))
}

fn audit_passes(report: &AuditReport) -> Check {
    match report.verdict {
        Verdict::Pass => Ok(format!(
            "{} {} m={} pass (worst margin {:.2e})",
            report.audit,
            report.kernel.id(),
            report.m,
            report.worst_margin.unwrap_or(f64::NAN)
        )),
        v => Err(format!(
            "{} {} m={}: {v:?}, {} violations, {} skipped {:?}",
            report.audit,
            report.kernel.id(),
            report.m,
            report.violation_count,
            report.skipped,
            report.skip_reasons
        )),
    }
}

fn localization_audit() -> Check {
    let mut lines = Vec::new();
    for name in BRIDGE_KERNELS {
        for m in [1, 2] {
            let report = audit::audit_localization(&AuditKernel::Catalog(kernel(name)), 3, m, 200, 42).map_err(|e| e.to_string())?;
            ensure!(report.completed == 200, "{name} m={m}: {} of 200 trials completed", report.completed);
            lines.push(audit_passes(&report)?);
        }
    }
    Ok(format!("6 audits of 200 trials: {}", lines.join("; ")))
}

fn greedy_extension() -> Check {
    let mut worst: f64 = f64::NEG_INFINITY;
    for name in BRIDGE_KERNELS {
        let report = audit::audit_greedy_extension(&AuditKernel::Catalog(kernel(name)), 4, 2, 100, 6, 1e-6).map_err(|e| e.to_string())?;
        audit_passes(&report)?;
        worst = worst.max(1e-6 - report.worst_margin.unwrap_or(0.0));
    }
    Ok(format!("300 instances, largest final norm excess {worst:.2e}"))
}

fn extension_independence() -> Check {
    let kernels = ["szego", "dirichlet", "bergman", "drury-arveson:2", "polydisc:2"];
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut rng = rng(7, trial);
        let spec = kernel(kernels[trial % kernels.len()]);
        let m = 1 + trial % 2;
        let n = rng.random_range(3..=5);
        let (_, g) = random_kernel(&mut rng, &spec, n, 0.9);
        let inner_len = rng.random_range(1..n);
        let inner = nevpick::sampling::random_subset(&mut rng, n, inner_len);
        let target = random_target(&mut rng, &inner, m, 0.9);
        let outer = nevpick::IndexSet::range(n);
        let report = check_extension_independence(&g, &target, &outer, 5, trial as u64).map_err(|e| e.to_string())?;
        audit_passes(&report).map_err(|e| format!("trial {trial} ({spec}): {e}"))?;
        worst = worst.max(1e-10 - report.worst_margin.unwrap_or(1e-10));
        // The compressed norm also agrees with the projection oracle for a random extension.
        let free: Vec<usize> = outer.difference(&target.domain()).to_vec();
        let extension = random_target(&mut rng, &free, m, 3.0);
        let op = build_operator_extended(&g, &target, &outer, Some(&extension)).map_err(|e| e.to_string())?;
        let oracle = projection_norm(&g, &target, &outer, Some(&extension));
        ensure!(
            (operator_norm(&op) - oracle).abs() <= 1e-8 * oracle.max(1.0),
            "trial {trial} ({spec}): compressed norm {} vs oracle {oracle}",
            operator_norm(&op)
        );
        let zero = build_operator(&g, &target, &outer).map_err(|e| e.to_string())?;
        ensure!((operator_norm(&zero) - oracle).abs() <= 1e-8 * oracle.max(1.0), "trial {trial}: zero extension differs");
    }
    Ok(format!("100 instances, largest discrepancy {worst:.2e}"))
}

fn rigidity_identity() -> Check {
    let da = ball_rigidity_check(&KernelSpec::drury_arveson(2).unwrap(), 1000, 8).map_err(|e| e.to_string())?;
    let worst = -da.worst_margin.ok_or("no samples completed")?;
    ensure!(da.completed == 1000, "{} samples completed", da.completed);
    ensure!(worst < 1e-12, "drury-arveson deviation {worst:e}");
    ensure!(da.verdict == Verdict::Pass, "drury-arveson verdict {:?}", da.verdict);

    let bergman = KernelSpec::bergman_ball(2).unwrap();
    let report = ball_rigidity_check(&bergman, 1000, 8).map_err(|e| e.to_string())?;
    ensure!(report.verdict == Verdict::ViolationFound, "bergman:2 verdict {:?}", report.verdict);
    let witness = report
        .violations
        .iter()
        .find(|v| matches!(&v.instance, Instance::Rigidity { point } if point.norm() >= 0.5) && v.gap > 0.1)
        .ok_or("no bergman:2 violation above 0.1 at |lambda| >= 0.5")?;
    let replayed = replay_violation(&report.kernel, witness).map_err(|e| e.to_string())?;
    ensure!((replayed - witness.gap).abs() <= 1e-10, "replay gives {replayed}, report {}", witness.gap);
    Ok(format!(
        "drury-arveson:2 worst deviation {worst:.1e}; bergman:2 deviation {:.3} at trial {}",
        witness.gap, witness.trial
    ))
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bergman_localization.json")
}

fn bergman_search() -> Check {
    let bergman = AuditKernel::Catalog(KernelSpec::bergman());
    let mut notes = Vec::new();
    for n in [3, 4] {
        let report = audit::audit_localization(&bergman, n, 1, 2000, 9).map_err(|e| e.to_string())?;
        match report.verdict {
            Verdict::Pass => return Err(format!("bergman n={n} reported pass")),
            Verdict::Inconclusive => notes.push(format!("n={n} inconclusive")),
            Verdict::ViolationFound => {
                let best = report
                    .violations
                    .iter()
                    .max_by(|a, b| a.gap.total_cmp(&b.gap))
                    .ok_or("violation-found without listed violations")?;
                ensure!(best.gap > 1e-6, "bergman n={n}: largest gap {:e}", best.gap);
                for v in &report.violations {
                    let replayed = replay_violation(&report.kernel, v).map_err(|e| e.to_string())?;
                    ensure!((replayed - v.gap).abs() <= 1e-10, "trial {} replays to {replayed}, listed {}", v.trial, v.gap);
                }
                let path = fixture_path();
                std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
                let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
                std::fs::write(&path, json + "\n").map_err(|e| e.to_string())?;
                return Ok(format!(
                    "n={n}: {} violations in {} trials, largest gap {:.3e}; archived {}",
                    report.violation_count,
                    report.completed,
                    best.gap,
                    path.file_name().unwrap().to_string_lossy()
                ));
            }
        }
    }
    Ok(format!("no violation found ({})", notes.join(", ")))
}

//! Pick matrices, solvability, and one-point extension problems.
//!
//! The Pick matrix at level `t` over indices `I` has `(i, j)` block
//! `(t²·I_m − z(i) z(j)*)·g(j, i)`. It is exactly `t²Ĝ − A*ĜA` for the
//! coefficient Gram form `Ĝ` and action `A` of `T_{g,z}`, so it is PSD iff
//! `‖T_{g,z}‖ ≤ t`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::discrete::{operator_norm, uncompressed_operator, DiscreteKernel, TargetData};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::sampling;
use crate::search::NelderMead;
use crate::tolerances::{BISECTION_CAP, BISECTION_TOL, PINV_CUTOFF, PSD_TOL, RANGE_RESIDUAL};
use crate::wire::{self, IndexSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PickMatrix {
    pub level: f64,
    pub m: usize,
    pub indices: IndexSet,
    #[serde(with = "wire::matrix")]
    pub matrix: CMatrix,
    /// Cholesky factor `L` of the coefficient Gram form over the same slots.
    #[serde(skip)]
    gram_factor: Option<CMatrix>,
}

impl PickMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// PSD verdict and the smallest eigenvalue.
    ///
    /// The verdict is taken on the congruent matrix `L⁻¹ P L⁻*` (`Ĝ = LL*`),
    /// whose eigenvalues are `t² − σₖ²` for the singular values `σₖ` of `T`,
    /// so the relative tolerance does not depend on the conditioning of `Ĝ`.
    pub fn psd(&self) -> (bool, f64) {
        let lo = self.min_eigenvalue();
        let probe = match &self.gram_factor {
            Some(l) => {
                let half = linalg::solve_lower(l, &self.matrix);
                linalg::hermitian_part(&linalg::solve_lower(l, &half.adjoint()))
            }
            None => self.matrix.clone(),
        };
        let vals = linalg::hermitian_eigenvalues(&probe);
        let probe_lo = vals.first().copied().unwrap_or(0.0);
        let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        (probe_lo >= -PSD_TOL * scale, lo)
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level.is_finite() && level >= 0.0) {
        return Err(Error::argument(format!("level must be finite and nonnegative, got {level}")));
    }
    Ok(())
}

fn check_domain_in_support(kernel: &DiscreteKernel, target: &TargetData) -> Result<()> {
    let domain = target.domain();
    if domain.largest().is_some_and(|i| i >= kernel.n()) {
        return Err(Error::argument(format!("target domain {domain} exceeds n = {}", kernel.n())));
    }
    let outside = domain.difference(&kernel.support());
    if !outside.is_empty() {
        return Err(Error::argument(format!("target indices {outside} are outside the kernel support")));
    }
    Ok(())
}

/// Assembles the Pick matrix without conditioning checks.
fn assemble(kernel: &DiscreteKernel, target: &TargetData, level: f64) -> CMatrix {
    let idx = target.domain().to_vec();
    let m = target.m();
    let t2 = level * level;
    let mut p = CMatrix::zeros(idx.len() * m, idx.len() * m);
    for (a, &i) in idx.iter().enumerate() {
        let zi = target.get(i).expect("index from domain");
        for (b, &j) in idx.iter().enumerate() {
            let zj = target.get(j).expect("index from domain");
            let mut block = -(zi * zj.adjoint());
            for r in 0..m {
                block[(r, r)] += t2;
            }
            p.view_mut((a * m, b * m), (m, m)).copy_from(&(block * kernel.get(j, i)));
        }
    }
    p
}

pub fn pick_matrix(kernel: &DiscreteKernel, target: &TargetData, level: f64) -> Result<PickMatrix> {
    check_level(level)?;
    check_domain_in_support(kernel, target)?;
    let idx = target.domain().to_vec();
    linalg::check_condition(&kernel.submatrix(&idx, &idx))?;
    Ok(PickMatrix {
        level,
        m: target.m(),
        indices: target.domain(),
        matrix: assemble(kernel, target, level),
        gram_factor: linalg::cholesky_lower(&kernel.coefficient_gram(&idx, target.m())).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Solvability {
    pub level: f64,
    pub solvable: bool,
    /// Smallest eigenvalue of the Pick matrix.
    pub margin: f64,
}

/// PSD verdict of the Pick matrix at level `t`.
pub fn pick_check(kernel: &DiscreteKernel, target: &TargetData, level: f64) -> Result<Solvability> {
    let (solvable, margin) = pick_matrix(kernel, target, level)?.psd();
    Ok(Solvability { level, solvable, margin })
}

/// The interpolation criterion: Pick matrix PSD at level 1.
pub fn is_solvable(kernel: &DiscreteKernel, target: &TargetData) -> Result<Solvability> {
    pick_check(kernel, target, 1.0)
}

/// Closed disc of admissible scalar values at a new index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleDisc {
    pub level: f64,
    #[serde(with = "wire::complex")]
    pub center: C64,
    pub radius: f64,
    pub empty: bool,
    pub degenerate: bool,
}

impl AdmissibleDisc {
    fn empty(level: f64) -> Self {
        AdmissibleDisc {
            level,
            center: C64::new(0.0, 0.0),
            radius: 0.0,
            empty: true,
            degenerate: false,
        }
    }

    fn point(level: f64, center: C64) -> Self {
        AdmissibleDisc {
            level,
            center,
            radius: 0.0,
            empty: false,
            degenerate: true,
        }
    }

    pub fn contains(&self, w: C64) -> bool {
        !self.empty && (w - self.center).norm() <= self.radius
    }
}

/// Admissible values `w` at `new_index` keeping the augmented Pick matrix PSD at `level` (`m = 1`).
///
/// Writing the augmented matrix as `[[K, b], [b*, c]]` with `b = t²u − w̄v`
/// and `c = (t² − |w|²)γ`, positivity is `K ⪰ 0`, `b ∈ range K` and
/// `c − b*K⁺b ≥ 0`; the last condition is `−(γ+s)|w|² + 2t²Re(w̄q) + t²γ − t⁴p ≥ 0`
/// with `p = u*K⁺u`, `q = u*K⁺v`, `s = v*K⁺v`.
pub fn one_point_disc(kernel: &DiscreteKernel, target: &TargetData, new_index: usize, level: f64) -> Result<AdmissibleDisc> {
    check_level(level)?;
    if target.m() != 1 {
        return Err(Error::argument("one-point discs are only defined for scalar targets (m = 1)"));
    }
    check_domain_in_support(kernel, target)?;
    if new_index >= kernel.n() {
        return Err(Error::argument(format!("new index {} exceeds n = {}", new_index + 1, kernel.n())));
    }
    if target.get(new_index).is_some() {
        return Err(Error::argument(format!("index {} already carries a target", new_index + 1)));
    }
    if !kernel.support().contains(new_index) {
        return Err(Error::argument(format!("new index {} is outside the kernel support", new_index + 1)));
    }
    let known = target.domain().to_vec();
    let mut all = known.clone();
    all.push(new_index);
    linalg::check_condition(&kernel.submatrix(&all, &all))?;

    let t2 = level * level;
    let gamma = kernel.get(new_index, new_index).re;
    let u = CVector::from_iterator(known.len(), known.iter().map(|&i| kernel.get(new_index, i)));
    let v = CVector::from_iterator(
        known.len(),
        known.iter().map(|&i| target.scalar_at(i).expect("known index") * kernel.get(new_index, i)),
    );

    let k = assemble(kernel, target, level);
    let (vals, vecs) = linalg::hermitian_eigen(&k);
    let top = vals.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if let Some(&lo) = vals.first() {
        if lo < -PSD_TOL * top {
            return Err(Error::InfeasibleLevel { level, margin: lo });
        }
    }

    // Pseudoinverse quadratic forms on the range, projections on the numerical kernel.
    let cutoff = PINV_CUTOFF * top;
    let (mut p, mut q, mut s) = (0.0, C64::new(0.0, 0.0), 0.0);
    let mut null_u = Vec::new();
    let mut null_v = Vec::new();
    for (idx, &lam) in vals.iter().enumerate() {
        let e = vecs.column(idx);
        let eu = e.dotc(&u);
        let ev = e.dotc(&v);
        if lam > cutoff {
            p += eu.norm_sqr() / lam;
            q += eu.conj() * ev / lam;
            s += ev.norm_sqr() / lam;
        } else {
            null_u.push(eu);
            null_v.push(ev);
        }
    }
    let schur = |w: C64| -(gamma + s) * w.norm_sqr() + 2.0 * t2 * (w.conj() * q).re + t2 * gamma - t2 * t2 * p;
    let schur_scale = (t2 * gamma + t2 * t2 * p).max(f64::MIN_POSITIVE);

    let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (nu, nv) = (norm(&null_u), norm(&null_v));
    let scale = u.norm().max(v.norm()).max(f64::MIN_POSITIVE);

    if nv > RANGE_RESIDUAL * scale {
        // The coupling column must lie in the range: t²·N*u = w̄·N*v pins w.
        let inner: C64 = null_v.iter().zip(&null_u).map(|(a, b)| a.conj() * b).sum();
        let w_bar = inner * t2 / (nv * nv);
        let residual = norm(&null_u.iter().zip(&null_v).map(|(a, b)| a * t2 - w_bar * b).collect::<Vec<_>>());
        if residual > RANGE_RESIDUAL * (t2 * u.norm() + w_bar.norm() * v.norm()).max(f64::MIN_POSITIVE) {
            return Ok(AdmissibleDisc::empty(level));
        }
        let w = w_bar.conj();
        return Ok(if schur(w) >= -PSD_TOL * schur_scale {
            AdmissibleDisc::point(level, w)
        } else {
            AdmissibleDisc::empty(level)
        });
    }
    if t2 * nu > RANGE_RESIDUAL * t2 * scale {
        return Ok(AdmissibleDisc::empty(level));
    }

    let denom = gamma + s;
    let center = q * (t2 / denom);
    let radius_sq = (t2 * gamma - t2 * t2 * p) / denom + center.norm_sqr();
    if radius_sq >= 0.0 {
        let radius = radius_sq.sqrt();
        Ok(AdmissibleDisc {
            level,
            center,
            radius,
            empty: false,
            degenerate: radius == 0.0,
        })
    } else if denom * radius_sq >= -PSD_TOL * schur_scale {
        Ok(AdmissibleDisc::point(level, center))
    } else {
        Ok(AdmissibleDisc::empty(level))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionMode {
    ExactOnePoint,
    GreedySequential,
    BisectionSearch,
}

impl std::str::FromStr for ExtensionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-one-point" => Ok(ExtensionMode::ExactOnePoint),
            "greedy-sequential" | "greedy" => Ok(ExtensionMode::GreedySequential),
            "bisection-search" | "bisection" => Ok(ExtensionMode::BisectionSearch),
            _ => Err(Error::Parse(format!(
                "unknown extension mode {s:?}; expected exact-one-point, greedy-sequential or bisection-search"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    /// 1-based index being extended, when the step belongs to one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionResult {
    pub mode: ExtensionMode,
    /// `‖T_{g,z}‖` on the original domain; no extension can go below it.
    pub lower_bound: f64,
    /// The level reached: `t*` for exact mode, the final working level for greedy mode,
    /// the best norm found for bisection-search.
    pub norm: f64,
    /// Norm of `T` for the returned extension, recomputed from scratch.
    pub achieved_norm: f64,
    pub extension: TargetData,
    /// Set when the search could not show that `norm` is optimal.
    pub upper_bound_only: bool,
    pub trace: Vec<TraceStep>,
}

/// Options for the multi-start search of `bisection-search` mode.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub starts: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { starts: 32, seed: 0 }
    }
}

fn disc_is_feasible(kernel: &DiscreteKernel, target: &TargetData, new_index: usize, level: f64) -> Result<Option<AdmissibleDisc>> {
    match one_point_disc(kernel, target, new_index, level) {
        Ok(d) if !d.empty => Ok(Some(d)),
        Ok(_) | Err(Error::InfeasibleLevel { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Smallest level (to `BISECTION_TOL`) at which the one-point disc at `new_index` is nonempty.
fn bisect_level(
    kernel: &DiscreteKernel,
    target: &TargetData,
    new_index: usize,
    lower: f64,
    trace: &mut Vec<TraceStep>,
) -> Result<(f64, AdmissibleDisc)> {
    let mut lo = lower;
    let mut hi = (target.max_norm() + 1.0).max(lower);
    let mut best = loop {
        let feasible = disc_is_feasible(kernel, target, new_index, hi)?;
        trace.push(TraceStep {
            index: Some(new_index + 1),
            lo,
            hi,
            level: hi,
            feasible: feasible.is_some(),
        });
        match feasible {
            Some(d) => break d,
            None if hi >= BISECTION_CAP => {
                return Err(Error::argument(format!("no feasible level found below {BISECTION_CAP}")));
            }
            None => {
                lo = hi;
                hi = (2.0 * hi).min(BISECTION_CAP);
            }
        }
    };
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let feasible = disc_is_feasible(kernel, target, new_index, mid)?;
        trace.push(TraceStep {
            index: Some(new_index + 1),
            lo,
            hi,
            level: mid,
            feasible: feasible.is_some(),
        });
        match feasible {
            Some(d) => {
                hi = mid;
                best = d;
            }
            None => lo = mid,
        }
    }
    Ok((hi, best))
}

fn scalar_value(w: C64) -> CMatrix {
    CMatrix::from_element(1, 1, w)
}

fn norm_over(kernel: &DiscreteKernel, target: &TargetData) -> Result<f64> {
    Ok(operator_norm(&uncompressed_operator(kernel, target)?))
}

/// Minimal norm of `T_{g,z̃}` over extensions `z̃` of `z` to `universe`.
pub fn minimal_extension_norm(
    kernel: &DiscreteKernel,
    target: &TargetData,
    universe: &IndexSet,
    mode: ExtensionMode,
    options: SearchOptions,
) -> Result<ExtensionResult> {
    let domain = target.domain();
    if !domain.is_subset(universe) {
        return Err(Error::argument(format!("target domain {domain} is not contained in {universe}")));
    }
    if universe.largest().is_some_and(|i| i >= kernel.n()) {
        return Err(Error::argument(format!("index set {universe} exceeds n = {}", kernel.n())));
    }
    let lower_bound = norm_over(kernel, target)?;
    let spt = kernel.support();
    let free = universe.difference(&domain);
    let mut trace = Vec::new();

    let finish = |extension: TargetData, norm: f64, upper_bound_only: bool, trace: Vec<TraceStep>| -> Result<ExtensionResult> {
        Ok(ExtensionResult {
            mode,
            lower_bound,
            norm,
            achieved_norm: norm_over(kernel, &extension)?,
            extension,
            upper_bound_only,
            trace,
        })
    };

    match mode {
        ExtensionMode::ExactOnePoint => {
            if target.m() != 1 {
                return Err(Error::argument("exact-one-point mode needs m = 1"));
            }
            let new_index = match free.to_vec().as_slice() {
                [i] => *i,
                _ => {
                    return Err(Error::argument(format!(
                        "exact-one-point mode needs exactly one free index, got {}",
                        free.len()
                    )))
                }
            };
            if !spt.contains(new_index) {
                // T does not see values off the support.
                let ext = target.with_value(new_index, scalar_value(C64::new(0.0, 0.0)))?;
                return finish(ext, lower_bound, false, trace);
            }
            let (level, disc) = bisect_level(kernel, target, new_index, lower_bound, &mut trace)?;
            let ext = target.with_value(new_index, scalar_value(disc.center))?;
            finish(ext, level, false, trace)
        }
        ExtensionMode::GreedySequential => {
            if target.m() != 1 {
                return Err(Error::argument("greedy-sequential mode needs m = 1"));
            }
            let mut level = lower_bound;
            let mut current = target.clone();
            for i in free.iter() {
                if !spt.contains(i) {
                    current = current.with_value(i, scalar_value(C64::new(0.0, 0.0)))?;
                    continue;
                }
                let disc = match disc_is_feasible(kernel, &current, i, level)? {
                    Some(d) => {
                        trace.push(TraceStep {
                            index: Some(i + 1),
                            lo: level,
                            hi: level,
                            level,
                            feasible: true,
                        });
                        d
                    }
                    None => {
                        let (raised, d) = bisect_level(kernel, &current, i, level, &mut trace)?;
                        level = raised;
                        d
                    }
                };
                current = current.with_value(i, scalar_value(disc.center))?;
            }
            finish(current, level, false, trace)
        }
        ExtensionMode::BisectionSearch => {
            let unknown: Vec<usize> = free.intersection(&spt).to_vec();
            let mut base = target.clone();
            for i in free.difference(&spt).iter() {
                base = base.with_value(i, CMatrix::zeros(target.m(), target.m()))?;
            }
            if unknown.is_empty() {
                return finish(base, lower_bound, false, trace);
            }
            let (extension, best) = multi_start_search(kernel, &base, &unknown, options)?;
            trace.push(TraceStep {
                index: None,
                lo: lower_bound,
                hi: best,
                level: best,
                feasible: true,
            });
            finish(extension, best, best > lower_bound + 1e-6, trace)
        }
    }
}

fn unpack(base: &TargetData, unknown: &[usize], x: &[f64]) -> TargetData {
    let m = base.m();
    let mut values: BTreeMap<usize, CMatrix> = base.values().clone();
    for (k, &i) in unknown.iter().enumerate() {
        let off = k * 2 * m * m;
        values.insert(
            i,
            CMatrix::from_fn(m, m, |r, c| {
                let p = off + 2 * (r * m + c);
                C64::new(x[p], x[p + 1])
            }),
        );
    }
    TargetData::new(m, values).expect("unpacked extension is well formed")
}

/// Seeded multi-start Nelder–Mead over the unknown values; ties go to the lowest start.
fn multi_start_search(
    kernel: &DiscreteKernel,
    base: &TargetData,
    unknown: &[usize],
    options: SearchOptions,
) -> Result<(TargetData, f64)> {
    let m = base.m();
    let dim = unknown.len() * 2 * m * m;
    let scale = base.max_norm().max(1e-3);
    // Surface conditioning problems once instead of inside every start.
    norm_over(kernel, &unpack(base, unknown, &vec![0.0; dim]))?;
    let objective = |x: &[f64]| norm_over(kernel, &unpack(base, unknown, x)).unwrap_or(f64::INFINITY);
    let nm = NelderMead {
        initial_step: 0.25 * scale,
        max_evaluations: 400 * dim.max(4),
        value_tol: 1e-14,
    };
    let results: Vec<(Vec<f64>, f64)> = (0..options.starts.max(1))
        .into_par_iter()
        .map(|start| {
            let x0: Vec<f64> = if start == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = sampling::trial_rng(options.seed, start);
                (0..dim / 2)
                    .flat_map(|_| {
                        let z = sampling::complex_gaussian(&mut rng) * scale;
                        [z.re, z.im]
                    })
                    .collect()
            };
            let (x, v) = nm.minimize(&x0, objective);
            // A restart from the best point shakes off early simplex collapse.
            let (x2, v2) = nm.minimize(&x, objective);
            if v2 < v {
                (x2, v2)
            } else {
                (x, v)
            }
        })
        .collect();
    let (x, v) = results
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("at least one start");
    Ok((unpack(base, unknown, &x), v))
}

//! Structured audit outcomes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::discrete::{DiscreteKernel, TargetData};
use crate::kernels::{KernelSpec, Point};
use crate::wire::IndexSet;

pub const REPORT_SCHEMA: &str = "nevpick-report/1";

/// Largest number of violations listed in a report; `violation_count` has the total.
pub const MAX_LISTED_VIOLATIONS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    ViolationFound,
    Inconclusive,
}

/// The kernel an audit ran against: a catalog entry or an explicit discrete kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AuditKernel {
    Catalog(KernelSpec),
    Discrete(DiscreteKernel),
}

impl AuditKernel {
    pub fn id(&self) -> String {
        match self {
            AuditKernel::Catalog(k) => k.to_string(),
            AuditKernel::Discrete(g) => format!("discrete(n={})", g.n()),
        }
    }
}

/// Everything needed to re-evaluate one audited instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    /// Compression to `H(inner, outer)` against the uncompressed operator on `inner`.
    Localization {
        /// Sampled points, when the kernel is a catalog kernel.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Point>>,
        inner: IndexSet,
        outer: IndexSet,
        target: TargetData,
    },
    /// Compression built with `extension` against the zero extension.
    Extension {
        outer: IndexSet,
        target: TargetData,
        extension: TargetData,
    },
    /// Pick margins before and after permuting the points.
    Reduction {
        points: Vec<Point>,
        target: TargetData,
        /// `permutation[k]` is the original index of the k-th permuted point.
        permutation: Vec<usize>,
    },
    /// The diagonal rigidity identity at one point of the ball.
    Rigidity { point: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub instance: Instance,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: String,
    pub audit: String,
    pub kernel: AuditKernel,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub trials: usize,
    pub completed: usize,
    pub skipped: usize,
    /// Skip counts keyed by reason.
    pub skip_reasons: BTreeMap<String, usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// Smallest slack `rhs − lhs` (or `−deviation`) seen over completed trials.
    pub worst_margin: Option<f64>,
    pub verdict: Verdict,
    /// Free-form remarks, e.g. why a clean run is inconclusive.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Outcome of a single audit trial before aggregation.
#[derive(Debug, Clone)]
pub(crate) enum TrialOutcome {
    Done {
        margin: f64,
        violation: Option<Violation>,
    },
    Skipped(String),
}

pub(crate) struct ReportBuilder {
    pub audit: String,
    pub kernel: AuditKernel,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl ReportBuilder {
    /// Merges trial outcomes in trial order. `certified` says whether a clean run may be called a pass.
    pub fn finish(self, outcomes: Vec<TrialOutcome>, certified: bool, mut notes: Vec<String>) -> AuditReport {
        let trials = outcomes.len();
        let mut skip_reasons = BTreeMap::new();
        let mut violations = Vec::new();
        let mut worst_margin: Option<f64> = None;
        let mut completed = 0;
        for outcome in outcomes {
            match outcome {
                TrialOutcome::Done { margin, violation } => {
                    completed += 1;
                    worst_margin = Some(worst_margin.map_or(margin, |w| w.min(margin)));
                    violations.extend(violation);
                }
                TrialOutcome::Skipped(reason) => *skip_reasons.entry(reason).or_insert(0) += 1,
            }
        }
        let violation_count = violations.len();
        if violations.len() > MAX_LISTED_VIOLATIONS {
            violations.sort_by(|a, b| b.gap.total_cmp(&a.gap).then(a.trial.cmp(&b.trial)));
            violations.truncate(MAX_LISTED_VIOLATIONS);
            violations.sort_by_key(|v| v.trial);
        }
        let skipped = trials - completed;
        let verdict = if violation_count > 0 {
            Verdict::ViolationFound
        } else if skipped > 0 || !certified {
            if skipped > 0 {
                notes.push(format!("{skipped} of {trials} trials were skipped"));
            }
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        AuditReport {
            schema: REPORT_SCHEMA.to_string(),
            audit: self.audit,
            kernel: self.kernel,
            n: self.n,
            m: self.m,
            seed: self.seed,
            trials,
            completed,
            skipped,
            skip_reasons,
            tolerances: self.tolerances,
            violation_count,
            violations,
            worst_margin,
            verdict,
            notes,
        }
    }
}

pub(crate) fn skip_reason(err: &crate::error::Error) -> String {
    use crate::error::Error;
    match err {
        Error::Conditioning { .. } => "conditioning".into(),
        Error::Degenerate { .. } => "degenerate-points".into(),
        Error::Domain { .. } => "domain".into(),
        Error::InfeasibleLevel { .. } => "infeasible-level".into(),
        Error::Argument(_) | Error::Parse(_) => "argument".into(),
    }
}

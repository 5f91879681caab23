//! Command-line front end.
//!
//! Exit codes: 0 when a result was computed (whatever its verdict), 1 for
//! input errors, 2 for conditioning or degeneracy failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::audit;
use crate::discrete::{build_operator, operator_norm, uncompressed_operator, DiscreteKernel, TargetData};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec, Point};
use crate::pick::{self, ExtensionMode, SearchOptions};
use crate::report::{AuditKernel, REPORT_SCHEMA};
use crate::tolerances::CERTIFICATE_ORDER;
use crate::wire::{self, IndexSet};

/// A problem exchanged as JSON. Indices are 1-based; complex numbers are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kernel: KernelSpec,
    pub points: Vec<Point>,
    #[serde(default)]
    pub targets: BTreeMap<usize, Vec<Vec<[f64; 2]>>>,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Index whose value is sought (`solve-one-point`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_index: Option<usize>,
    /// `I₁` for `norm` (compression) and the extension universe for `extend`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::argument("m must be a positive integer"));
        }
        let n = self.points.len();
        for (&i, rows) in &self.targets {
            if i == 0 || i > n {
                return Err(Error::argument(format!("target index {i} is outside 1..{n}")));
            }
            if rows.len() != self.m || rows.iter().any(|r| r.len() != self.m) {
                return Err(Error::argument(format!("target at index {i} is not {0}x{0}", self.m)));
            }
        }
        if let Some(k) = self.new_index {
            if k == 0 || k > n {
                return Err(Error::argument(format!("new_index {k} is outside 1..{n}")));
            }
        }
        if let Some(outer) = &self.outer {
            IndexSet::from_one_based(outer).map_err(Error::Argument)?;
            if outer.iter().any(|&i| i > n) {
                return Err(Error::argument(format!("outer set exceeds 1..{n}")));
            }
        }
        Ok(())
    }

    pub fn level(&self) -> f64 {
        self.level.unwrap_or(1.0)
    }

    pub fn discrete_kernel(&self) -> Result<DiscreteKernel> {
        Ok(DiscreteKernel::from_gram(&gram_matrix(&self.kernel, &self.points)?))
    }

    pub fn target_data(&self) -> Result<TargetData> {
        let mut values = BTreeMap::new();
        for (&i, rows) in &self.targets {
            values.insert(i - 1, wire::rows_to_matrix(rows).map_err(Error::Argument)?);
        }
        TargetData::new(self.m, values)
    }

    fn outer_set(&self) -> Result<Option<IndexSet>> {
        self.outer
            .as_deref()
            .map(|o| IndexSet::from_one_based(o).map_err(Error::Argument))
            .transpose()
    }
}

#[derive(Debug, Parser)]
#[command(name = "nevpick", version, about = "Nevanlinna-Pick interpolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Emit a plain key/value table.
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gram matrix of the problem's points.
    Gram {
        problem: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Norm of the discrete multiplier operator (compressed to `outer` when given).
    Norm {
        problem: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Pick matrix positivity at the problem's level.
    PickCheck {
        problem: PathBuf,
        /// Override the level t.
        #[arg(long)]
        level: Option<f64>,
        /// Absolute eigenvalue tolerance instead of the relative default.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Admissible disc for a scalar value at `new_index`.
    SolveOnePoint {
        problem: PathBuf,
        #[arg(long)]
        level: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Minimal-norm extension of the targets to `outer` (all points by default).
    Extend {
        problem: PathBuf,
        /// exact-one-point, greedy-sequential or bisection-search.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Seeded audit that compression never raises the operator norm.
    AuditLocalization {
        #[arg(long)]
        kernel: KernelSpec,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Exact sign check of the inverse kernel series.
    NpCertificate {
        #[arg(long)]
        kernel: KernelSpec,
        #[arg(long, default_value_t = CERTIFICATE_ORDER)]
        order: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Monomial norm ratios on the ball for `n₁ = n₂ = j`; CSV unless `--json`.
    BallSeparation {
        #[arg(long, default_value_t = 40)]
        jmax: usize,
        #[arg(long)]
        json: bool,
    },
    /// Sampled check of the diagonal rigidity identity on the ball.
    RigidityCheck {
        #[arg(long)]
        kernel: KernelSpec,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

enum Rendered {
    Json(Json, bool),
    Text(String),
}

/// Runs the CLI; report on stdout, diagnostics on stderr. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run_with(argv, &mut stdout, &mut stderr)
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(Rendered::Json(value, table)) => {
            let text = if table { render_table(&value) } else { to_json(&value) };
            let _ = writeln!(stdout, "{text}");
            0
        }
        Ok(Rendered::Text(text)) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn to_json(value: &Json) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn render_table(value: &Json) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn flatten(prefix: &str, value: &Json, rows: &mut Vec<(String, String)>) {
    match value {
        Json::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, rows);
            }
        }
        Json::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn read_problem(path: &Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::argument(format!("{}: {e}", path.display())))?;
    ProblemFile::parse(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn with_schema(command: &str, body: Json) -> Json {
    let mut out = json!({ "schema": REPORT_SCHEMA, "command": command });
    if let (Json::Object(out), Json::Object(body)) = (&mut out, body) {
        out.extend(body);
    }
    out
}

fn to_value<T: Serialize>(x: &T) -> Json {
    serde_json::to_value(x).expect("reports serialize")
}

fn dispatch(command: Command) -> Result<Rendered> {
    match command {
        Command::Gram { problem, out } => {
            let p = read_problem(&problem)?;
            let gram = gram_matrix(&p.kernel, &p.points)?;
            Ok(Rendered::Json(with_schema("gram", to_value(&gram)), out.table))
        }
        Command::Norm { problem, out } => {
            let p = read_problem(&problem)?;
            let g = p.discrete_kernel()?;
            let target = p.target_data()?;
            let body = match p.outer_set()? {
                Some(outer) => {
                    let op = build_operator(&g, &target, &outer)?;
                    json!({
                        "inner": target.domain(),
                        "outer": outer,
                        "norm": operator_norm(&op),
                        "uncompressed_norm": operator_norm(&uncompressed_operator(&g, &target)?),
                    })
                }
                None => json!({
                    "inner": target.domain(),
                    "norm": operator_norm(&uncompressed_operator(&g, &target)?),
                }),
            };
            Ok(Rendered::Json(with_schema("norm", body), out.table))
        }
        Command::PickCheck { problem, level, tol, out } => {
            let p = read_problem(&problem)?;
            let level = level.unwrap_or(p.level());
            let g = p.discrete_kernel()?;
            let target = p.target_data()?;
            let pm = pick::pick_matrix(&g, &target, level)?;
            let (relative_ok, margin) = pm.psd();
            let solvable = match tol {
                Some(t) => margin >= -t,
                None => relative_ok,
            };
            let body = json!({
                "verdict": if solvable { "solvable" } else { "unsolvable" },
                "level": level,
                "margin": margin,
                "pick_matrix": wire::matrix_to_rows(&pm.matrix),
            });
            Ok(Rendered::Json(with_schema("pick-check", body), out.table))
        }
        Command::SolveOnePoint { problem, level, out } => {
            let p = read_problem(&problem)?;
            let level = level.unwrap_or(p.level());
            let new_index = p.new_index.ok_or_else(|| Error::argument("solve-one-point needs new_index"))?;
            let g = p.discrete_kernel()?;
            let target = p.target_data()?;
            let body = match pick::one_point_disc(&g, &target, new_index - 1, level) {
                Ok(disc) => json!({
                    "verdict": if disc.empty { "empty" } else { "admissible" },
                    "new_index": new_index,
                    "level": level,
                    "disc": {
                        "center": wire::complex_to_pair(disc.center),
                        "radius": disc.radius,
                        "empty": disc.empty,
                        "degenerate": disc.degenerate,
                    },
                }),
                Err(Error::InfeasibleLevel { level, margin }) => json!({
                    "verdict": "infeasible-level",
                    "new_index": new_index,
                    "level": level,
                    "margin": margin,
                }),
                Err(e) => return Err(e),
            };
            Ok(Rendered::Json(with_schema("solve-one-point", body), out.table))
        }
        Command::Extend { problem, mode, seed, out } => {
            let p = read_problem(&problem)?;
            let mode: ExtensionMode = mode
                .or_else(|| p.mode.clone())
                .as_deref()
                .unwrap_or("greedy-sequential")
                .parse()?;
            let g = p.discrete_kernel()?;
            let target = p.target_data()?;
            let universe = p.outer_set()?.unwrap_or_else(|| IndexSet::range(p.points.len()));
            let options = SearchOptions { seed, ..SearchOptions::default() };
            let result = pick::minimal_extension_norm(&g, &target, &universe, mode, options)?;
            Ok(Rendered::Json(with_schema("extend", to_value(&result)), out.table))
        }
        Command::AuditLocalization { kernel, n, m, trials, seed, out } => {
            let report = audit::audit_localization(&AuditKernel::Catalog(kernel), n, m, trials, seed)?;
            Ok(Rendered::Json(to_value(&report), out.table))
        }
        Command::NpCertificate { kernel, order, out } => {
            let report = audit::np_certificate(&kernel, order)?;
            Ok(Rendered::Json(to_value(&report), out.table))
        }
        Command::BallSeparation { jmax, json } => {
            let rows = audit::ball_separation(jmax)?;
            if json {
                let body = json!({ "jmax": jmax, "rows": rows });
                return Ok(Rendered::Json(with_schema("ball-separation", body), false));
            }
            let mut text = String::from("j,ratio,ratio_float\n");
            for row in rows {
                text.push_str(&format!("{},{},{}\n", row.j, row.ratio, row.ratio.to_f64()));
            }
            Ok(Rendered::Text(text))
        }
        Command::RigidityCheck { kernel, samples, seed, out } => {
            let report = audit::ball_rigidity_check(&kernel, samples, seed)?;
            Ok(Rendered::Json(to_value(&report), out.table))
        }
    }
}

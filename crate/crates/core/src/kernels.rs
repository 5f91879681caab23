//! Catalog of holomorphic reproducing kernels and Gram matrix assembly.
//!
//! Every catalog kernel except the polydisc one is a function of a single
//! series variable `x = ⟨μ, λ⟩ = Σ μ_k conj(λ_k)`, written `k_λ(μ) = Σ kₙ xⁿ`
//! with nonnegative rational diagonal coefficients `kₙ`. The polydisc
//! kernel is the product of one Szegő factor per coordinate.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::tolerances::{DOMAIN_MARGIN, POINT_SEPARATION};
use crate::wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `1/(1 − x)` on the disc.
    Szego,
    /// `(1/x) log(1/(1 − x))` on the disc.
    Dirichlet,
    /// `1/(1 − x)²` on the disc, or on the ball when `dim > 1`.
    Bergman,
    /// `1/(1 − ⟨μ, λ⟩)` on the ball of `C^d`.
    DruryArveson,
    /// `Π 1/(1 − conj(λ_k) μ_k)` on the polydisc.
    Polydisc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Open Euclidean unit ball of `C^d` (the disc when `d = 1`).
    Ball(usize),
    /// Open unit polydisc of `C^d`.
    Polydisc(usize),
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::Ball(d) | Domain::Polydisc(d) => d,
        }
    }

    /// Distance from the boundary in the domain's natural norm.
    pub fn interior_margin(self, p: &Point) -> f64 {
        match self {
            Domain::Ball(_) => 1.0 - p.norm(),
            Domain::Polydisc(_) => 1.0 - p.coords().iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
}

impl KernelSpec {
    pub fn szego() -> Self {
        KernelSpec { family: KernelFamily::Szego, dim: 1 }
    }

    pub fn dirichlet() -> Self {
        KernelSpec { family: KernelFamily::Dirichlet, dim: 1 }
    }

    pub fn bergman() -> Self {
        KernelSpec { family: KernelFamily::Bergman, dim: 1 }
    }

    /// `1/(1 − ⟨μ, λ⟩)²` on the ball of `C^d`, diagonal coefficients `n + 1`.
    pub fn bergman_ball(d: usize) -> Result<Self> {
        Self::with_dim(KernelFamily::Bergman, d)
    }

    pub fn drury_arveson(d: usize) -> Result<Self> {
        Self::with_dim(KernelFamily::DruryArveson, d)
    }

    pub fn polydisc(d: usize) -> Result<Self> {
        Self::with_dim(KernelFamily::Polydisc, d)
    }

    fn with_dim(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::argument("kernel dimension must be positive"));
        }
        Ok(KernelSpec { family, dim })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        match self.family {
            KernelFamily::Polydisc => Domain::Polydisc(self.dim),
            _ => Domain::Ball(self.dim),
        }
    }

    /// Whether `k_λ(μ)` is a power series in the single variable `⟨μ, λ⟩`.
    pub fn has_diagonal_series(&self) -> bool {
        self.family != KernelFamily::Polydisc || self.dim == 1
    }

    /// Exact diagonal coefficient `kₙ`, if the kernel has a one-variable series.
    pub fn diagonal_coefficient(&self, n: usize) -> Option<BigRational> {
        let int = |v: usize| BigRational::from_integer(BigInt::from(v));
        match self.family {
            KernelFamily::Szego | KernelFamily::DruryArveson => Some(int(1)),
            KernelFamily::Polydisc if self.dim == 1 => Some(int(1)),
            KernelFamily::Polydisc => None,
            KernelFamily::Dirichlet => Some(BigRational::new(BigInt::from(1), BigInt::from(n + 1))),
            KernelFamily::Bergman => Some(int(n + 1)),
        }
    }

    /// Coefficients `k₀ … k_{len−1}`.
    pub fn diagonal_series(&self, len: usize) -> Option<Vec<BigRational>> {
        (0..len).map(|n| self.diagonal_coefficient(n)).collect()
    }

    /// `kₙ` in floating point; zero when the kernel has no one-variable series.
    pub fn diagonal_coefficient_f64(&self, n: usize) -> f64 {
        self.diagonal_coefficient(n).and_then(|q| q.to_f64()).unwrap_or(0.0)
    }

    /// Value of the one-variable generating function at `x`.
    fn series_function(&self, x: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self.family {
            KernelFamily::Szego | KernelFamily::DruryArveson | KernelFamily::Polydisc => (one - x).inv(),
            KernelFamily::Bergman => (one - x).powi(2).inv(),
            KernelFamily::Dirichlet => dirichlet_function(x),
        }
    }

    /// Checks interiority (with margin) and dimension of `p`; `index` is only used in the error.
    pub fn check_point(&self, p: &Point, index: usize) -> Result<()> {
        let domain_err = |detail: String| Error::Domain {
            kernel: self.to_string(),
            index: index + 1,
            detail,
        };
        if p.dim() != self.dim {
            return Err(domain_err(format!("expected {} coordinates, got {}", self.dim, p.dim())));
        }
        if p.coords().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain_err("non-finite coordinate".into()));
        }
        let margin = self.domain().interior_margin(p);
        if margin <= DOMAIN_MARGIN {
            return Err(domain_err(format!("boundary margin {margin:e} is below {DOMAIN_MARGIN:e}")));
        }
        Ok(())
    }

    /// `k_λ(μ)`.
    pub fn eval(&self, lambda: &Point, mu: &Point) -> Result<C64> {
        self.check_point(lambda, 0)?;
        self.check_point(mu, 1)?;
        Ok(self.eval_unchecked(lambda, mu))
    }

    fn eval_unchecked(&self, lambda: &Point, mu: &Point) -> C64 {
        match self.family {
            KernelFamily::Polydisc => lambda
                .coords()
                .iter()
                .zip(mu.coords())
                .map(|(l, m)| self.series_function(l.conj() * m))
                .product(),
            _ => self.series_function(mu.inner(lambda)),
        }
    }
}

/// `Σ xⁿ/(n+1)`, which equals `−log(1 − x)/x` away from `x = 0`.
fn dirichlet_function(x: C64) -> C64 {
    if x.norm() < 0.5 {
        // 0.5⁶⁰/61 is below f64 resolution relative to the leading term 1.
        let mut sum = C64::new(0.0, 0.0);
        let mut power = C64::new(1.0, 0.0);
        for n in 0..60 {
            sum += power / (n as f64 + 1.0);
            power *= x;
        }
        sum
    } else {
        -(C64::new(1.0, 0.0) - x).ln() / x
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family, self.dim) {
            (KernelFamily::Szego, _) => write!(f, "szego"),
            (KernelFamily::Dirichlet, _) => write!(f, "dirichlet"),
            (KernelFamily::Bergman, 1) => write!(f, "bergman"),
            (KernelFamily::Bergman, d) => write!(f, "bergman:{d}"),
            (KernelFamily::DruryArveson, d) => write!(f, "drury-arveson:{d}"),
            (KernelFamily::Polydisc, d) => write!(f, "polydisc:{d}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, dim) = match s.trim().split_once(':') {
            Some((name, d)) => {
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad kernel dimension in {s:?}")))?;
                (name, Some(d))
            }
            None => (s.trim(), None),
        };
        match (name, dim) {
            ("szego", None | Some(1)) => Ok(Self::szego()),
            ("dirichlet", None | Some(1)) => Ok(Self::dirichlet()),
            ("bergman", None) => Ok(Self::bergman()),
            ("bergman", Some(d)) => Self::bergman_ball(d),
            ("drury-arveson", Some(d)) => Self::drury_arveson(d),
            ("polydisc", Some(d)) => Self::polydisc(d),
            ("drury-arveson" | "polydisc", None) => {
                Err(Error::Parse(format!("kernel {name:?} needs a dimension, e.g. \"{name}:2\"")))
            }
            _ => Err(Error::Parse(format!(
                "unknown kernel {s:?}; expected szego, dirichlet, bergman[:d], drury-arveson:d or polydisc:d"
            ))),
        }
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A point of `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<C64>);

impl Point {
    pub fn new(coords: Vec<C64>) -> Self {
        Point(coords)
    }

    pub fn scalar(z: C64) -> Self {
        Point(vec![z])
    }

    pub fn real(x: f64) -> Self {
        Point(vec![C64::new(x, 0.0)])
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `⟨self, other⟩ = Σ self_k conj(other_k)`.
    pub fn inner(&self, other: &Point) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: C64) -> Point {
        Point(self.0.iter().map(|z| z * s).collect())
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.iter().map(|&z| wire::complex_to_pair(z)).collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Coords(Vec<[f64; 2]>),
            Scalar([f64; 2]),
        }
        let raw = Raw::deserialize(d)
            .map_err(|_| D::Error::custom("a point is an array of [re, im] pairs (or one [re, im] pair in dimension 1)"))?;
        Ok(match raw {
            Raw::Coords(v) => Point(v.into_iter().map(wire::pair_to_complex).collect()),
            Raw::Scalar(p) => Point(vec![wire::pair_to_complex(p)]),
        })
    }
}

/// `G[i][j] = k_{λ_i}(λ_j)` over a point list. Hermitian: `G[j][i] = conj(G[i][j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    pub kernel: KernelSpec,
    pub points: Vec<Point>,
    #[serde(with = "wire::matrix")]
    pub entries: CMatrix,
    pub condition_estimate: f64,
    pub convention: &'static str,
}

pub const GRAM_CONVENTION: &str = "G[i][j] = k_{lambda_i}(lambda_j); G[j][i] = conj(G[i][j])";

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn eval_kernel(spec: &KernelSpec, lambda: &Point, mu: &Point) -> Result<C64> {
    spec.eval(lambda, mu)
}

/// Builds the Gram matrix, rejecting near-duplicate points and ill-conditioned results.
pub fn gram_matrix(spec: &KernelSpec, points: &[Point]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::argument("gram matrix needs at least one point"));
    }
    for (i, p) in points.iter().enumerate() {
        spec.check_point(p, i)?;
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let distance = points[i].distance(&points[j]);
            if distance <= POINT_SEPARATION {
                return Err(Error::Degenerate {
                    first: i + 1,
                    second: j + 1,
                    distance,
                });
            }
        }
    }
    let entries = gram_entries(spec, points);
    let condition_estimate = linalg::check_condition(&entries)?;
    Ok(GramMatrix {
        kernel: *spec,
        points: points.to_vec(),
        entries,
        condition_estimate,
        convention: GRAM_CONVENTION,
    })
}

/// Upper triangle by evaluation, lower triangle by conjugation, real diagonal.
fn gram_entries(spec: &KernelSpec, points: &[Point]) -> CMatrix {
    let n = points.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = C64::new(spec.eval_unchecked(&points[i], &points[i]).re, 0.0);
        for j in (i + 1)..n {
            let v = spec.eval_unchecked(&points[i], &points[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn szego_values() {
        let k = KernelSpec::szego();
        assert_eq!(k.eval(&Point::real(0.0), &Point::real(0.5)).unwrap(), c(1.0, 0.0));
        assert!(close(k.eval(&Point::real(0.5), &Point::real(0.5)).unwrap(), c(4.0 / 3.0, 0.0), 1e-15));
    }

    #[test]
    fn dirichlet_center_is_one() {
        let k = KernelSpec::dirichlet();
        assert_eq!(k.eval(&Point::real(0.0), &Point::real(0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn dirichlet_branches_agree_across_switch() {
        // At |x| = 0.5 both formulas are valid; compare them directly.
        let x = C64::from_polar(0.5, 1.1);
        let closed = -(C64::new(1.0, 0.0) - x).ln() / x;
        let series: C64 = (0..200).map(|n| x.powu(n) / (n as f64 + 1.0)).sum();
        assert!(close(closed, series, 1e-15));
        let inside = C64::from_polar(0.499_999_999, 1.1);
        assert!(close(dirichlet_function(inside), closed, 1e-9));
    }

    #[test]
    fn drury_arveson_on_the_ball() {
        let k = KernelSpec::drury_arveson(2).unwrap();
        let p = Point::new(vec![c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(close(k.eval(&p, &p).unwrap(), c(4.0 / 3.0, 0.0), 1e-15));
    }

    #[test]
    fn boundary_points_are_rejected() {
        let k = KernelSpec::szego();
        assert!(matches!(k.eval(&Point::real(1.0), &Point::real(0.0)), Err(Error::Domain { .. })));
        assert!(k.eval(&Point::real(1.0 - 1e-10), &Point::real(0.0)).is_err());
        let da = KernelSpec::drury_arveson(2).unwrap();
        let outside = Point::new(vec![c(0.8, 0.0), c(0.0, 0.7)]);
        assert!(da.eval(&outside, &outside).is_err());
        // Inside the polydisc but outside the ball.
        assert!(KernelSpec::polydisc(2).unwrap().eval(&outside, &outside).is_ok());
    }

    #[test]
    fn wrong_dimension_is_a_domain_error() {
        let da = KernelSpec::drury_arveson(2).unwrap();
        assert!(matches!(da.eval(&Point::real(0.1), &Point::real(0.1)), Err(Error::Domain { .. })));
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&KernelSpec::szego(), &[Point::real(0.0), Point::real(0.5)]).unwrap();
        let expected = [[1.0, 1.0], [1.0, 4.0 / 3.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert!(close(g.entries[(i, j)], c(want, 0.0), 1e-15));
            }
        }
        for spec in catalog() {
            let origin = Point::new(vec![c(0.0, 0.0); spec.dim()]);
            let g = gram_matrix(&spec, &[origin]).unwrap();
            assert_eq!(g.entries[(0, 0)], c(1.0, 0.0));
        }
    }

    #[test]
    fn near_duplicates_are_degenerate() {
        let pts = [Point::real(0.3), Point::real(0.3 + 1e-14)];
        assert!(matches!(gram_matrix(&KernelSpec::szego(), &pts), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn kernel_names_round_trip() {
        for name in ["szego", "dirichlet", "bergman", "bergman:2", "drury-arveson:3", "polydisc:2"] {
            let k: KernelSpec = name.parse().unwrap();
            assert_eq!(k.to_string(), name);
        }
        assert!("drury-arveson".parse::<KernelSpec>().is_err());
        assert!("polydisc:0".parse::<KernelSpec>().is_err());
        assert!("hardy".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn points_accept_scalar_shorthand() {
        let p: Point = serde_json::from_str("[0.5, -0.25]").unwrap();
        assert_eq!(p, Point::scalar(c(0.5, -0.25)));
        let q: Point = serde_json::from_str("[[0.5, -0.25], [0, 1e-3]]").unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[0.5,-0.25]]");
    }

    pub(crate) fn catalog() -> Vec<KernelSpec> {
        vec![
            KernelSpec::szego(),
            KernelSpec::dirichlet(),
            KernelSpec::bergman(),
            KernelSpec::bergman_ball(2).unwrap(),
            KernelSpec::drury_arveson(2).unwrap(),
            KernelSpec::drury_arveson(3).unwrap(),
            KernelSpec::polydisc(2).unwrap(),
        ]
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside the kernel's domain, or within the boundary margin.
    #[error("point {index} is outside the domain of {kernel}: {detail}")]
    Domain {
        kernel: String,
        index: usize,
        detail: String,
    },

    /// Two points coincide to within the separation threshold.
    #[error("degenerate point set: points {first} and {second} are {distance:e} apart")]
    Degenerate {
        first: usize,
        second: usize,
        distance: f64,
    },

    /// A Gram form is too ill-conditioned to trust in double precision.
    #[error("ill-conditioned Gram form: condition estimate {estimate:e} exceeds {limit:e}")]
    Conditioning { estimate: f64, limit: f64 },

    /// The known-point Pick block is already indefinite at the requested level.
    #[error("level {level} is infeasible for the known data (smallest eigenvalue {margin:e})")]
    InfeasibleLevel { level: f64, margin: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Numerical failures (conditioning or degeneracy) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Conditioning { .. } | Error::Degenerate { .. })
    }
}

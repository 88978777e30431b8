use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate direction: source and target positions coincide")]
    DegenerateDirection,

    #[error("domain error: {what} must be {expected}, got {value}")]
    Domain {
        what: &'static str,
        expected: &'static str,
        value: f64,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("infeasible constraints: {constraints} constraints with only {elements} elements")]
    InfeasibleConstraints { constraints: usize, elements: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("desired steering vector is zero")]
    ZeroDesired,

    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    #[error("exponential integral diverges at x = 0")]
    EiDivergence,

    #[error(
        "quadrature did not converge: estimate {estimate}, error {error_estimate} after {subdivisions} subdivisions"
    )]
    QuadratureDivergence {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("SVD did not converge")]
    SvdDivergence,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            expected: "positive and finite",
            value,
        })
    }
}

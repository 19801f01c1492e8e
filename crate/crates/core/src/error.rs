use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Syntax error in a map expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unbound parameter(s): {}", .0.join(", "))]
    UnboundParams(Vec<String>),

    #[error("domain error: {func} is singular at {at}")]
    Singular { func: &'static str, at: Complex64 },

    #[error("series error: {0}")]
    Series(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {at} is too close to the boundary (|phi| = {modulus:.6}, limit {limit:.6})")]
    BoundaryProximity {
        at: Complex64,
        modulus: f64,
        limit: f64,
    },

    #[error("points coincide: |x - y| = {0:e}")]
    Coincidence(f64),

    #[error("vortex separation {0:e} is below the collision floor")]
    CollisionFloor(f64),

    #[error("degenerate strengths: {0}")]
    DegenerateStrengths(String),

    #[error("origin is not stationary: |phi''(0)| = {0:e}")]
    NotStationary(f64),

    #[error("stationary point search failed: {0}")]
    NoConvergence(String),

    #[error("stationary point is {0}, operation requires a stable point")]
    NotStable(&'static str),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("event localization failed at t = {t}")]
    EventLocalization { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Configuration problems map to CLI exit code 1, numerical failures to 2.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::UnboundParams(_)
                | Error::InvalidDomain(_)
                | Error::InvalidArgument(_)
                | Error::DegenerateStrengths(_)
                | Error::Io(_)
        )
    }
}

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An integrand returned NaN or an infinity at the given quadrature node.
    NonFiniteIntegrand { point: f64, value: f64 },
    /// A checkerboard cell mass could not be computed.
    NonFiniteCell { cell: Vec<usize> },
    /// `F(1) < target` while inverting a distribution function.
    InversionDomain { target: f64, value_at_one: f64 },
    /// A parameter is outside its admissible range.
    InvalidParameter(String),
    /// A checkerboard mass array violates the copula invariants.
    InvalidGrid(String),
    /// Two objects with different covariate dimensions were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// An operation was called outside its domain (e.g. `N > n`).
    Precondition(String),
    /// A family specification string could not be parsed.
    Parse(String),
    /// An unknown bound tag was requested.
    UnknownTag(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteIntegrand { point, value } => {
                write!(f, "integrand is not finite at midpoint {point} (value {value})")
            }
            Error::NonFiniteCell { cell } => write!(f, "cell mass is not finite at cell {cell:?}"),
            Error::InversionDomain { target, value_at_one } => {
                write!(f, "cannot invert: F(1) = {value_at_one} is below target {target}")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::InvalidGrid(msg) => write!(f, "invalid checkerboard grid: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "covariate dimension mismatch: expected {expected}, found {found}")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Parse(msg) => write!(f, "cannot parse family specification: {msg}"),
            Error::UnknownTag(tag) => write!(f, "unknown bound tag `{tag}`"),
        }
    }
}

impl core::error::Error for Error {}

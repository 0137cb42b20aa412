//! Error type shared by all modules.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Family parameters outside the range for which the polynomials induce a
    /// hypergroup (Jacobi outside W, Bernstein-Szego outside its strip, ...).
    ParameterOutOfRange(String),
    /// The family only ships Haar-weight/asymptotics diagnostics and cannot be
    /// evaluated or simulated.
    NotSimulationGrade(String),
    /// A linearization coefficient of a custom system came out negative beyond
    /// tolerance, so the coefficient function does not induce a hypergroup.
    HypergroupViolation { m: usize, n: usize, k: usize, value: f64 },
    /// A sequence was indexed past the data it carries.
    IndexOutOfRange { needed: usize, len: usize },
    /// The quadrature rule is too short to resolve the requested moment.
    QuadratureUnderresolved { order: usize, needed: usize },
    /// supp(mu) has fewer points than the requested chain depth; the Gram
    /// matrix is singular from `depth` on.
    MeasureDegenerate { depth: usize },
    /// Moment supply too short for the requested depth.
    MomentSupply { needed: usize, got: usize },
    /// A matrix claimed to be structured failed the structural identity.
    InconsistentMatrix { row: usize, col: usize, residual: f64 },
    /// Continuous bimeasures are not supported by this operation.
    NonAtomicUnsupported,
    /// Invalid construction input (dimension mismatch, empty data, NaN, ...).
    Invalid(String),
    /// I/O or parse failure in the CSV/JSON interfaces.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterOutOfRange(msg) => write!(f, "parameter-out-of-range: {msg}"),
            Error::NotSimulationGrade(msg) => write!(f, "not-simulation-grade: {msg}"),
            Error::HypergroupViolation { m, n, k, value } => write!(
                f,
                "hypergroup-violation: g({m},{n},{k}) = {value:e} is negative beyond tolerance"
            ),
            Error::IndexOutOfRange { needed, len } => {
                write!(f, "index-out-of-range: needed index {needed}, length {len}")
            }
            Error::QuadratureUnderresolved { order, needed } => write!(
                f,
                "quadrature-underresolved: rule order {order}, needed at least {needed}"
            ),
            Error::MeasureDegenerate { depth } => {
                write!(f, "measure-degenerate: chain collapses at depth {depth}")
            }
            Error::MomentSupply { needed, got } => {
                write!(f, "moment-supply: need {needed} moments, got {got}")
            }
            Error::InconsistentMatrix { row, col, residual } => write!(
                f,
                "inconsistent-matrix: structural residual {residual:e} at ({row},{col})"
            ),
            Error::NonAtomicUnsupported => {
                write!(f, "non-atomic-unsupported: operation requires an atomic bimeasure")
            }
            Error::Invalid(msg) => write!(f, "invalid: {msg}"),
            Error::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

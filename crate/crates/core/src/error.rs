//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A gradient with norm below the zero tolerance cannot be normalized;
    /// the point is treated as critical.
    #[error("gradient norm {norm:e} is below the zero tolerance {tol:e}")]
    ZeroGradient { norm: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis {axis}: value {value} outside [{lo}, {hi}]")]
    OutOfRange {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("axis {axis}: log-scaled axis requires 0 < lo < hi, got lo = {lo}")]
    NonPositiveBound { axis: usize, lo: f64 },

    #[error("parameter {name} must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("seed point lies outside the cube [-1,1]^m")]
    SeedOutsideCube,

    /// The walk produced fewer than two points: the seed sits at (or snaps to)
    /// a critical point and no streamline can be traced from it.
    #[error("degenerate manifold: fewer than two points could be traced from the seed")]
    DegenerateManifold,

    #[error("manifold values are not strictly increasing at index {index}")]
    NonMonotoneValues { index: usize },

    #[error("knots are not strictly increasing at index {index}")]
    UnsortedKnots { index: usize },

    #[error("knot and value lists have different lengths ({knots} vs {values})")]
    LengthMismatch { knots: usize, values: usize },

    #[error("at least two knots are required, got {got}")]
    TooFewKnots { got: usize },

    #[error("sample set is empty")]
    EmptySamples,

    /// Every candidate step direction collapsed onto the gradient line.
    /// Only reachable from measure-zero inputs (walker at the origin with a
    /// degenerate history).
    #[error("no level-set step direction could be constructed")]
    NoDirection,

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error reflects degenerate input data rather than misuse.
    /// The CLI maps these to exit code 2.
    pub fn is_degenerate_input(&self) -> bool {
        matches!(
            self,
            Error::DegenerateManifold
                | Error::ZeroGradient { .. }
                | Error::EmptySamples
                | Error::TooFewKnots { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

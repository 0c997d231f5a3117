use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),

    #[error("invalid evaluation point: {0}")]
    InvalidPoint(String),

    /// Fractional powers of A are undefined at this point.
    #[error("A = {value} is not positive; F = A^(1/m) is undefined here")]
    NonPositiveA { value: f64 },

    #[error("degenerate matrix: |det| = {det:e} is below the threshold {threshold:e}")]
    Degenerate { det: f64, threshold: f64 },

    #[error("jet order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("jet shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sampling starved: {accepted} of {requested} valid directions after {attempts} draws")]
    SamplingStarved {
        requested: usize,
        accepted: usize,
        attempts: usize,
    },

    #[error(
        "underdetermined fit: {samples} samples for {unknowns} unknowns (need at least {required})"
    )]
    Underdetermined {
        samples: usize,
        unknowns: usize,
        required: usize,
    },

    #[error("unknown catalog metric `{0}`")]
    UnknownMetric(String),
}

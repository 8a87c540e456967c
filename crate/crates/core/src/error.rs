use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {index} has norm {norm} (|norm - 1| exceeds {tol})")]
    NotUnit { index: usize, norm: f64, tol: f64 },

    #[error("points have inconsistent dimension: expected {expected}, point {index} has {found}")]
    DimensionMismatch {
        expected: usize,
        index: usize,
        found: usize,
    },

    #[error("degenerate subset {indices:?}: {reason}")]
    DegenerateSubset { indices: Vec<usize>, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("subset count overflows 128-bit arithmetic (N = {n}, bound = {bound})")]
    Overflow { n: u64, bound: u64 },

    #[error("zero vector produced by sampler transform; advance the input")]
    ZeroVector,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

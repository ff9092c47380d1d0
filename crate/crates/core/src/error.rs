use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid dilation factor {0}: must be positive")]
    InvalidDilation(f64),

    #[error("lens series did not converge within {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("unsupported Bessel order {0}: only non-negative multiples of 1/2 are supported")]
    UnsupportedOrder(f64),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("grid needs more than {cap} nodes")]
    NodeCapExceeded { cap: usize },

    #[error("degenerate grid: no cell midpoint lies inside the region")]
    DegenerateGrid,

    #[error("eigensolver failed on a {size}x{size} matrix (frobenius norm {norm:.3e}): {reason}")]
    Eigensolver { size: usize, norm: f64, reason: String },

    #[error("eigenvalue #{index} ({value:.3e}) is not above the floor {floor:.1e}")]
    RankDeficient { index: usize, value: f64, floor: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("fit range error: {0}")]
    FitRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

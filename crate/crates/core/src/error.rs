use thiserror::Error;

/// Errors raised by the geometry, transform and inference routines.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm})")]
    EigenNonConvergence {
        sweeps: usize,
        off_norm: f64,
        input: crate::spd::SymMat,
    },

    #[error("matrix exponential overflow (eigenvalue {eigenvalue})")]
    Overflow { eigenvalue: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("weights must sum to 1, got {sum}")]
    WeightSum { sum: f64 },

    #[error("vector length {len} is not of the form d(d+1)/2")]
    BadEtaLength { len: usize },

    #[error("sequence length {len} is not a power of two")]
    NonPowerOfTwo { len: usize },

    #[error("smoothing scale j0={j0} out of range 0..={j}")]
    ScaleOutOfRange { j0: usize, j: usize },

    #[error("prediction window length {got}, expected {expected}")]
    WindowLength { expected: usize, got: usize },

    #[error("interpolation abscissae must be strictly increasing")]
    NonIncreasingAbscissae,

    #[error("limit matrix iteration did not converge within {cap} steps")]
    LimitNonConvergence { cap: usize },

    #[error("singular covariance matrix")]
    SingularCovariance,

    #[error("degenerate bounding box for volume estimation")]
    DegenerateBox,

    #[error("curve evaluation at t={t} is not positive definite")]
    CurveNotSpd { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has zero dimension")]
    Empty,

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace {trace} violates the {kind} constraint")]
    TraceViolation { trace: f64, kind: &'static str },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {dim} does not factor as {dim_a} x {dim_b}")]
    BadFactorization {
        dim: usize,
        dim_a: usize,
        dim_b: usize,
    },

    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("support of the first argument is not contained in the support of the second")]
    SupportViolation,

    #[error("Renyi order {0} is outside (0,1) U (1,inf)")]
    BadAlpha(f64),

    #[error("relative entropy variance {0:.3e} is too small for a second-order expansion")]
    ZeroVariance(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent conic model: {0}")]
    Model(String),

    #[error("conic solver failure: {0}")]
    SolverFailure(String),

    #[error("smoothing program reported infeasible for valid input (internal error)")]
    InfeasibleSmoothing,

    #[error("all {0} seesaw restarts failed")]
    AllRestartsFailed(usize),

    #[error("delta grid is empty")]
    EmptyGrid,

    #[error("free-state set is empty")]
    EmptyFreeSet,

    #[error("classical-quantum state does not have a uniform classical distribution")]
    NonUniformInput,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

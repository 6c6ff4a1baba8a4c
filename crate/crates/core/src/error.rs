use thiserror::Error;

/// Errors produced by the numerical kernels and the channel constructions built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("tolerance must satisfy 0 < value < 1 (got {0})")]
    InvalidTolerance(f64),

    #[error("Kraus list is empty")]
    EmptyKraus,

    #[error("map is not contractive: lambda_max(sum t_i t_i*) = {lambda_max:.12}")]
    NotContractive { lambda_max: f64 },

    #[error("Choi matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e}); the map is not completely positive")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not a contraction (norm {norm:.12})")]
    NotContraction { norm: f64 },

    #[error("tuple is not isometric on the trusted interior (residual {residual:.3e})")]
    NotIsometric { residual: f64 },

    #[error("requested {requested} iterations but the truncation is only trusted up to k = {safe}")]
    HorizonExceeded { requested: usize, safe: usize },

    #[error("raw Stinespring dimension {raw_dim} exceeds the budget of {budget}")]
    BudgetExceeded { raw_dim: usize, budget: usize },

    #[error("defect sequence violates a[j+1] <= d*a[j] at j = {index} ({next:.6e} > {bound:.6e})")]
    InvalidSequence { index: usize, next: f64, bound: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("inconsistent construction: {0}")]
    Inconsistent(String),

    #[error("invalid truncation family: {0}")]
    InvalidFamily(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Failures of the iterative kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// `p·Ap <= 0`: the operator is not positive definite on the search space.
    #[error("CG breakdown at iteration {iteration}: p·Ap = {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("diagonal entry {value:e} in row {row} is not positive")]
    NonPositiveDiagonal { row: usize, value: f64 },
    #[error("zero diagonal in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("no convergence after {iterations} iterations (relative residual {relative_residual:e})")]
    NotConverged {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("node ({ix}, {iy}, {iz}) is outside a {nx}x{ny}x{nz} grid")]
    NodeOutOfRange {
        ix: usize,
        iy: usize,
        iz: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("degenerate element with size {0:?}")]
    DegenerateElement([f64; 3]),
    #[error("negative Robin coefficient {alpha:e} at {point:?}")]
    NegativeRobin { alpha: f64, point: [f64; 3] },
    #[error("vector of length {found} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("solver failed on level {level} ({mesh}): {source}")]
    Level {
        level: usize,
        mesh: String,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{op} needs strictly positive inputs, got ({a:e}, {b:e})")]
    NonPositive { op: &'static str, a: f64, b: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

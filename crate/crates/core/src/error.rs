use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("advancing front stalled: {0}")]
    FrontStalled(String),

    #[error("stencil of point {point} is under-resolved ({size} points for {required} monomials)")]
    UnderResolvedStencil {
        point: usize,
        size: usize,
        required: usize,
    },

    #[error("moment matrix of point {point} is singular")]
    SingularStencil { point: usize },

    #[error("voronoi cell of point {point} is degenerate (measure {measure:e})")]
    DegenerateCell { point: usize, measure: f64 },

    #[error("voronoi cell of point {point} has no interior faces")]
    IsolatedCell { point: usize },

    #[error("point {point} is not on a neumann boundary face")]
    MisclassifiedBoundary { point: usize },

    #[error("zero pivot in row {row} during incomplete factorization")]
    ZeroPivot { row: usize },

    #[error("bicgstab breakdown in iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("bicgstab did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("bicgstab stagnated after {iterations} iterations (residual {residual:e})")]
    Stagnation { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("reference solution has zero norm")]
    ZeroNorm,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

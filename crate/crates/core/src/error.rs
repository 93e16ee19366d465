use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("zero-length edge between vertices {0} and {1}")]
    DegenerateEdge(usize, usize),

    #[error("polygon is self-intersecting: edge {0} crosses edge {1}")]
    SelfIntersecting(usize, usize),

    #[error("polygon has zero signed area")]
    ZeroArea,

    #[error("ear clipping failed at vertex {vertex} with {remaining} vertices left (near-degenerate input)")]
    EarClipFailure { vertex: usize, remaining: usize },

    #[error("not enough degrees of freedom: requested {requested}, available {available}")]
    NotEnoughDof { requested: usize, available: usize },

    #[error("mass matrix is not positive definite (pivot {pivot} = {value:e})")]
    MassNotPD { pivot: usize, value: f64 },

    #[error("eigensolver did not converge: best relative residual {best_residual:e} after {iterations} iterations")]
    NoConvergence {
        best_residual: f64,
        iterations: usize,
    },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("vector form refuses non-convex corner at vertex {vertex} (interior angle {angle_deg:.3} deg)")]
    NonConvexCorner { vertex: usize, angle_deg: f64 },

    #[error("no sign change bracketing zero {index} of {kind} order {order} below x = {upper}")]
    BracketFailure {
        kind: &'static str,
        order: usize,
        index: usize,
        upper: f64,
    },

    #[error("spectra metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("not enough eigenvalues: need {needed} {which}, have {have}")]
    NotEnoughEigenvalues {
        which: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("convergence ratios unusable (non-monotone sequence): {values:?}")]
    NonMonotone { values: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or a violated precondition.
    Input,
    /// A rewrite or verification precondition does not hold for the given walk.
    Verification,
    /// Floating point trouble: drift, non-unitarity, convergence.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),

    #[error("polygon lists vertex {0} more than once")]
    DuplicateVertex(VertexId),

    #[error("empty polygon")]
    EmptyPolygon,

    #[error("invalid tessellation cover: {0}")]
    InvalidCover(String),

    #[error("clique grid needs n >= 2 and q >= 1, got n={n}, q={q}")]
    InvalidGridSize { n: usize, q: usize },

    #[error("expansion size must be at least 1")]
    ZeroCliqueSize,

    #[error("{0}")]
    NotAnIntersection(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error(
        "clique restriction is not proportional to the clique state (residual {residual:.3e})"
    )]
    ProportionalityViolation { residual: f64 },

    #[error(
        "reduction not applicable: tessellations {pair:?} have non-proportional restrictions \
         (worst residual {residual:.3e})"
    )]
    ReductionNotApplicable { residual: f64, pair: (usize, usize) },

    #[error("tessellation {0} has no amplitude mass on the intersection")]
    ZeroMass(usize),

    #[error("no tessellation {0}")]
    NoSuchTessellation(usize),

    #[error("tessellation {tessellation} has no polygon {polygon}")]
    NoSuchPolygon { tessellation: usize, polygon: usize },

    #[error("numerical drift: squared norm {norm_sqr} after step {step}")]
    NumericalDrift { norm_sqr: f64, step: usize },

    #[error("dense materialization of dimension {dim} exceeds the cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("lifted vector is not an eigenvector (residual {residual:.3e})")]
    InternalInconsistency { residual: f64 },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ProportionalityViolation { .. }
            | Error::ReductionNotApplicable { .. }
            | Error::ZeroMass(_)
            | Error::NotAnIntersection(_)
            | Error::InvalidCover(_) => ErrorKind::Verification,
            Error::NumericalDrift { .. }
            | Error::NotUnitary { .. }
            | Error::NoConvergence
            | Error::InternalInconsistency { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base: {0}")]
    InvalidBase(String),
    #[error("balancing condition violated: |prod - target| = {deviation:.3e}")]
    BalancingViolated { deviation: f64 },
    #[error("reflection vector must have squared norm 2, got {0}")]
    NotARoot(String),
    #[error("root {0} does not lie in R(E7)")]
    NotAnE7Root(String),
    #[error("input roots do not form a closed root subsystem")]
    NotClosedSubsystem,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hyperplane condition violated: coordinates sum to {got}, expected {expected}")]
    HyperplaneViolated { expected: String, got: String },
    #[error("{0} is not supported for polytope {1}")]
    UnsupportedPolytope(String, String),
    #[error("point lies outside the polytope; {0} inequalities violated")]
    OutsidePolytope(usize),
    #[error("contour admissibility lost: {0}")]
    ContourInvalid(String),
    #[error("quadrature failed to converge within {max_nodes} nodes (last delta {last_delta:.3e})")]
    QuadratureNotConverged { max_nodes: usize, last_delta: f64 },
    #[error("series diverged or exceeded the term cap")]
    SeriesDiverged,
    #[error("series hit a lower-parameter pole before terminating")]
    SeriesPole,
    #[error("argument too close to a pole: {0}")]
    PoleProximity(String),
    #[error("runtime constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("no admissible parameter draw found after {0} attempts")]
    DrawExhausted(usize),
    #[error("triangle condition failed: {0}")]
    BadTriangle(String),
    #[error("weyl word does not stabilize the face")]
    NotAStabilizer,
    #[error("weyl word maps the face to itself; expected a distinct image")]
    NotATransformation,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("golden catalog mismatch: {0}")]
    CatalogMismatch(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

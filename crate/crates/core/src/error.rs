use thiserror::Error;

/// Errors raised by the library.
///
/// Domain errors (bad parameters, invalid indices) are kept apart from
/// numerical failures so callers can tell a rejected query from a solve that
/// went wrong.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edge {index} is a self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: usize },
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge index {index} out of range ({count} edges)")]
    EdgeOutOfRange { index: usize, count: usize },
    #[error("edge index {0} listed more than once")]
    DuplicateEdge(usize),
    #[error("edge {0} is both included and excluded")]
    ConflictingEvent(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration budget exceeded: {edges} edges (limit {limit})")]
    BudgetExceeded { edges: usize, limit: usize },
    #[error("matrix is singular or numerically ill-conditioned: {0}")]
    Singular(String),
    #[error("probability {value} lies outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid shape code {code:?}: {reason}")]
    InvalidShapeCode { code: String, reason: String },
    #[error("shape height {height} exceeds truncation height {h}")]
    HeightViolation { height: usize, h: usize },
    #[error("shape has {size} vertices but the graph only has {n}")]
    ShapeTooLarge { size: usize, n: usize },
    #[error("graph file: {0}")]
    Parse(String),
    #[error("law covers mass {mass}, more than 1")]
    LawMass { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

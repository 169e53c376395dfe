use crate::hypergraph::EdgeId;

/// Errors raised by the sparsifier library.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex count must be at least 1")]
    NoVertices,
    #[error("empty tail")]
    EmptyTail,
    #[error("empty head")]
    EmptyHead,
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("vector length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector entries must be finite")]
    NonFiniteEntry,
    #[error("vertex counts differ: {0} vs {1}")]
    VertexCountMismatch(usize, usize),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("level budget is undefined for an empty edge set")]
    EmptyEdgeSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("capacity of {max_m} live edges exceeded")]
    CapacityExceeded { max_m: usize },
    #[error("exhaustive cut enumeration supports n <= {max}, got n = {n}")]
    TooManyVertices { n: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed graph file: {0}")]
    Malformed(String),
    #[error("non-positive measure {value} at node `{node}`")]
    NonPositiveMeasure { node: String, value: f64 },
    #[error("non-positive weight {value} on edge `{a}`-`{b}`")]
    NonPositiveWeight { a: String, b: String, value: f64 },
    #[error("self-loop at node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{a}`-`{b}`")]
    DuplicateEdge { a: String, b: String },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("disconnected graph: {reached} of {total} nodes reachable from `{root}`")]
    Disconnected {
        root: String,
        reached: usize,
        total: usize,
    },
    #[error("empty graph")]
    EmptyGraph,
    #[error("field has {got} values but the graph has {expected} nodes")]
    DomainMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

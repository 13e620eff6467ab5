use thiserror::Error;

/// Errors produced by graph ingestion, state validation and the bound
/// machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains no nodes")]
    EmptyGraph,

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("percolation state for node {node} is {value}, outside [0, 1]")]
    StateOutOfRange { node: usize, value: f64 },

    #[error("all percolation states are equal; the total pair weight is zero")]
    DegenerateStates,

    #[error(
        "percolation centrality undefined for node {node}: fewer than two \
         distinct states among the remaining nodes"
    )]
    UndefinedCentrality { node: usize },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("required sample size {required} exceeds the hard cap {cap}; consider the exact algorithm")]
    SampleCapExceeded { required: u64, cap: u64 },

    #[error("graph too large for exhaustive path enumeration (n = {n}, limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

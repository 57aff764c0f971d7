use thiserror::Error;

/// Errors raised by the library.
///
/// Negative answers (an invalid picture, an unsolvable system) are data, not
/// errors; these variants cover malformed input and violated preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: expected an integer >= 2 or `inf`")]
    InvalidModulus(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("hypergraph has no vertices")]
    EmptyVertexSet,
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("invalid combinatorial map: {0}")]
    InvalidMap(String),
    #[error("face is not an orbit of the map's face permutation")]
    UnknownFace,
    #[error("map contains loop edges")]
    LoopsPresent,
    #[error("embedding is not planar")]
    NotPlanar,
    #[error("small-cancellation self-check failed for ({0},{1}): no low-degree vertex and no small face")]
    ScContradiction(usize, usize),
    #[error("invalid picture: {0}")]
    InvalidPicture(String),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("move not applicable: {0}")]
    InapplicableMove(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not simple")]
    NonSimpleGraph,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge {0} has no orientation")]
    MissingOrientation(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("size guard exceeded: {0} vertices > limit {1}")]
    SizeGuard(usize, usize),
    #[error("unknown gallery instance `{0}`")]
    UnknownInstance(String),
    #[error("theorem hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent facts: {0}")]
    Inconsistent(String),
    #[error("operator mismatch: {0}")]
    OperatorMismatch(String),
    #[error("malformed document: {0}")]
    Format(String),
    #[error("internal self-check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

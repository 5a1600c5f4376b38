use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("states {u} and {v} are not orthogonal in any subsystem")]
    NotOrthogonal { u: usize, v: usize },

    #[error(
        "ambiguous orthogonality between states {u} and {v} in subsystem {subsystem}: \
         |<u|v>| = {modulus:e} lies between zero_tol and gap_tol"
    )]
    AmbiguousOrthogonality {
        u: usize,
        v: usize,
        subsystem: usize,
        modulus: f64,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("realization failed: {0}")]
    RealizationFailure(String),

    #[error("invalid state set: {0}")]
    InvalidStateSet(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("exclusion not certified: {0}")]
    NotCertified(String),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("uncertifiable: {0}")]
    Uncertifiable(String),

    #[error("trivial input: {0}")]
    TrivialInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

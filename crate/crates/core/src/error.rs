use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative edge weight {mu} on ({u}, {v})")]
    NegativeWeight { u: String, v: String, mu: f64 },

    #[error("vertex measure must be positive and finite, got m({vertex}) = {m}")]
    InvalidMeasure { vertex: String, m: f64 },

    #[error("contradictory weights for edge ({u}, {v}): {first} vs {second}")]
    ContradictoryEdge {
        u: String,
        v: String,
        first: f64,
        second: f64,
    },

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex set must be nonempty")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("metric table is missing the pair ({0}, {1})")]
    MissingMetricPair(String, String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// A theorem hypothesis does not hold (metric not intrinsic, zero jump
    /// size, non-normalized measure, ...).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("function is not supported in the given set: nonzero at `{0}`")]
    SupportViolation(String),

    #[error("exhaustion sets are not nested at step {0}")]
    NotNested(usize),

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("kernel value at index {index} is not strictly positive ({value})")]
    NonPositiveKernel { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter out of supported range: {0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error reports a violated theorem hypothesis rather than
    /// malformed input.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self, Error::Hypothesis(_))
    }
}

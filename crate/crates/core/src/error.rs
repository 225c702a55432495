use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown graph family `{0}`")]
    UnknownFamily(String),

    #[error("parameter `{param}` out of range: {constraint}")]
    ParamOutOfRange { param: String, constraint: String },

    #[error("vertex {0} is not a vertex of this graph")]
    InvalidVertex(String),

    #[error("transition row at {vertex} sums to 1{sign}{deficit:e}")]
    RowSumViolation {
        vertex: String,
        deficit: f64,
        sign: char,
    },

    #[error("kernel is not reversible: detailed balance fails on edge ({from}, {to}) by {violation:e}")]
    NonReversible {
        from: String,
        to: String,
        violation: f64,
    },

    #[error("truncation ball needs {states} states, above the guard of {guard}; lower the horizon or switch to float mode")]
    BallGuardExceeded { states: usize, guard: usize },

    #[error("negative first-return probability {value:e} at step {n}; accumulated cancellation error")]
    NegativeFirstReturn { n: usize, value: f64 },

    #[error("linear system is singular (disconnected truncation)")]
    SingularSystem,

    #[error("source vertex must be interior to the truncation")]
    SourceOnBoundary,

    #[error("measure sequence has empty or zero-mass support at index {0}")]
    EmptyMeasure(usize),

    #[error("rescaling set has zero measure at index {0}")]
    RescaleZeroMass(usize),

    #[error("increasing covering family too small: needed {needed} subsequence points, found {found}")]
    IcfTooSmall { needed: usize, found: usize },

    #[error("function not evaluable at support vertex {0}")]
    NonEvaluable(String),

    #[error("embedding does not preserve edge ({from}, {to})")]
    EmbeddingViolation { from: String, to: String },

    #[error("unsupported family/subgraph pair for embedding: {0}")]
    UnsupportedEmbedding(String),

    #[error("translated flow energy differs from template by {0:e}")]
    EnergyMismatch(f64),

    #[error("inference hypothesis `{0}` is unverified; refusing to infer")]
    HypothesisMissing(String),

    #[error("partition part measures sum to {0}, not 1")]
    PartitionMassViolation(f64),

    #[error("exceptional set trace does not vanish within the window (last value {0})")]
    ExceptionalMassNotVanishing(f64),

    #[error("{0}")]
    Refused(String),

    #[error("spec parse error: {0}")]
    SpecParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

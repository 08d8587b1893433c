use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop pair ({0}, {0}) is not a valid edge")]
    SelfLoop(String),

    #[error("cannot build a graph from an empty edge list")]
    EmptyGraph,

    #[error("edge ({0}, {1}) is not in the graph")]
    UnknownEdge(String, String),

    #[error("node {0} is not in the graph")]
    UnknownNode(String),

    #[error("mailing list expansion exceeded depth {max_depth} at list {list}")]
    ListDepth { list: String, max_depth: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("distribution is not normalized: masses sum to {0}")]
    Unnormalized(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("oracle supports at most {max} support points, got {got}")]
    OracleSupportTooLarge { max: usize, got: usize },

    #[error("no observations for secret state {0}; cannot fit model")]
    UnfittableState(&'static str),

    #[error("no bucket with both secret states; sensitivity is undefined")]
    NoComputableBucket,

    #[error("invalid mechanism parameter: {0}")]
    InvalidParameter(String),

    #[error("mode {mode} requires a fitted {expected} sensitivity report")]
    MissingReport { mode: String, expected: String },

    #[error("sensitivity report kind {got} does not match requested mode {mode}")]
    ReportKindMismatch { mode: String, got: String },

    #[error("ratio check supports at most {max} edges, got {got}")]
    ToyGraphTooLarge { max: usize, got: usize },

    #[error("secret state has zero probability under theta")]
    ZeroProbabilitySecret,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("stale artifact {path}: corpus hash mismatch ({found} vs {expected})")]
    StaleArtifact {
        path: String,
        found: String,
        expected: String,
    },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("invalid run config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

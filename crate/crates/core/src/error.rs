use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("duplicate vector id {0}")]
    DuplicateId(u64),
    #[error("n_clusters {n_clusters} exceeds dataset size {len}")]
    TooManyClusters { n_clusters: usize, len: usize },
    #[error("unknown cluster id {0}")]
    UnknownCluster(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("infeasible moment match: variance {variance} >= mean(1-mean) {bound}")]
    InfeasibleVariance { variance: f64, bound: f64 },
    #[error("quadrature did not converge (last delta {delta})")]
    QuadratureDiverged { delta: f64 },
    #[error("index memory {index_bytes} B exceeds KV-cache budget {kv_bytes} B")]
    IndexExceedsMemory { index_bytes: u64, kv_bytes: u64 },
    #[error("partitioning did not converge within {iterations} iterations")]
    PartitionDiverged { iterations: u32 },
    #[error("routed batch built against map version {routed}, current is {current}")]
    StaleMapVersion { routed: u64, current: u64 },
    #[error("file format error: {0}")]
    Format(String),
    #[error("stale artifact chain: {0}")]
    StaleArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

//! Tiered IVF vector retrieval with SLO-aware index partitioning.
//!
//! The crate covers the full offline-to-runtime path of a two-tier
//! (fast "accelerator" shards + slow host) vector retrieval service:
//!
//! - [`vecstore`]: in-memory IVF index — k-means training, coarse
//!   quantization, per-cluster scanning, monolithic top-k search.
//! - [`profiler`]: cluster-access skew, coverage→hit-rate statistics,
//!   and piecewise-linear batch-latency fits from calibration queries.
//! - [`hitrate`]: Beta-model hit-rate machinery — expected batch-minimum
//!   hit rate and its inversion to a coverage target.
//! - [`partitioner`]: latency-bounded partitioning: derives the search
//!   budget from the SLO, models LLM throughput loss under index memory
//!   pressure, and converges on the partitioning point.
//! - [`splitter`]: materializes a plan into balanced shard sub-indexes
//!   plus global↔local cluster-ID mapping tables.
//! - [`pipeline`]: runtime hybrid engine — routing, pruned probes,
//!   early-release dispatching, and adaptive re-partitioning.
//! - [`simulator`]: deterministic discrete-event simulation of the
//!   arrival→search→LLM pipeline with calibrated cost models.
//!
//! Batch-level loops run on rayon when the `parallel` feature (default)
//! is enabled; results are identical either way.

pub mod artifact;
pub mod error;
pub mod exec;
pub mod hitrate;
pub mod partitioner;
pub mod pipeline;
pub mod profiler;
pub mod simulator;
pub mod splitter;
pub mod synth;
pub mod vecstore;

pub use error::{Error, Result};

//! Versioned JSON artifacts and their digest chains.
//!
//! Every artifact records SHA-256 digests of the inputs it was derived
//! from; downstream stages verify those digests against the files they
//! are handed and refuse stale chains.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::partitioner::{LatencyModel, LlmModel, MemoryModel, PartitionPlan, SloConfig};
use crate::profiler::{AccessProfile, CoveragePoint, LatencySample, SigmaMax};
use crate::splitter::ShardMap;

/// Named input digests, ordered for stable serialization.
pub type InputDigests = BTreeMap<String, String>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Verifies that `path`'s current digest matches the recorded one.
pub fn verify_input(digests: &InputDigests, name: &str, path: &Path) -> Result<()> {
    let recorded = digests
        .get(name)
        .ok_or_else(|| Error::StaleArtifact(format!("no recorded digest for input '{name}'")))?;
    let actual = file_digest(path)?;
    if recorded != &actual {
        return Err(Error::StaleArtifact(format!(
            "input '{name}' changed since this artifact was produced ({} != {})",
            &recorded[..12.min(recorded.len())],
            &actual[..12],
        )));
    }
    Ok(())
}

/// Sidecar metadata for binary artifacts whose formats carry no digest
/// fields of their own. Stored as `<artifact>.meta.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarMeta {
    pub version: u32,
    pub inputs: InputDigests,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

pub fn sidecar_path(artifact: &Path) -> std::path::PathBuf {
    let mut os = artifact.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

pub fn write_sidecar(artifact: &Path, meta: &SidecarMeta) -> Result<()> {
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(sidecar_path(artifact), json)?;
    Ok(())
}

pub fn read_sidecar(artifact: &Path) -> Result<SidecarMeta> {
    let bytes = std::fs::read(sidecar_path(artifact))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub const PROFILE_VERSION: u32 = 1;
pub const PLAN_VERSION: u32 = 1;

/// Where the latency curves in a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencySource {
    /// Wall-clock measurement on the profiling host.
    Measured,
    /// Injected analytic curves (deterministic pipelines, tests).
    Synthetic,
}

/// Profiling artifact: access statistics plus fitted latency models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileArtifact {
    pub version: u32,
    pub nprobe: usize,
    pub n_queries: usize,
    pub access: AccessProfile,
    pub sigma: SigmaMax,
    pub latency_samples: Vec<LatencySample>,
    pub latency: LatencyModel,
    pub latency_source: LatencySource,
    pub inputs: InputDigests,
}

impl ProfileArtifact {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(s)?;
        if a.version != PROFILE_VERSION {
            return Err(Error::Format(format!(
                "unsupported profile version {}",
                a.version
            )));
        }
        Ok(a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Shard mapping tables in array form for the plan JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardMapJson {
    pub n_shards: u16,
    /// `[global_cluster_id, shard_id, local_cluster_id]` triples.
    pub hot: Vec<(u32, u16, u32)>,
    pub cold: Vec<u32>,
    pub shard_bytes: Vec<u64>,
}

impl From<&ShardMap> for ShardMapJson {
    fn from(map: &ShardMap) -> Self {
        Self {
            n_shards: map.n_shards,
            hot: map
                .hot
                .iter()
                .map(|(&g, &(s, l))| (g, s, l))
                .collect(),
            cold: map.cold.iter().copied().collect(),
            shard_bytes: map.shard_bytes.clone(),
        }
    }
}

impl From<&ShardMapJson> for ShardMap {
    fn from(json: &ShardMapJson) -> Self {
        ShardMap {
            n_shards: json.n_shards,
            hot: json.hot.iter().map(|&(g, s, l)| (g, (s, l))).collect(),
            cold: json.cold.iter().copied().collect(),
            shard_bytes: json.shard_bytes.clone(),
        }
    }
}

/// Partitioning artifact: the plan plus every model needed to consume
/// it downstream. The splitter fills in `shard_map` and the shard-file
/// digests when the plan is materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanArtifact {
    pub version: u32,
    pub slo: SloConfig,
    pub mem: MemoryModel,
    pub llm: LlmModel,
    pub sigma2_max: f64,
    pub latency: LatencyModel,
    pub curve: Vec<CoveragePoint>,
    pub plan: PartitionPlan,
    #[serde(default)]
    pub shard_map: Option<ShardMapJson>,
    #[serde(default)]
    pub shard_files: BTreeMap<String, String>,
    pub inputs: InputDigests,
}

impl PlanArtifact {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(s)?;
        if a.version != PLAN_VERSION {
            return Err(Error::Format(format!(
                "unsupported plan version {}",
                a.version
            )));
        }
        Ok(a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

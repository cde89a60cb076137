//! Materializes a partition plan: balanced shard sub-indexes plus the
//! global↔local cluster-ID mapping tables that drive probe routing.
//!
//! Hot clusters are sorted by byte size (descending, ties by ascending
//! id) and dealt round-robin across shards to balance memory. Each shard
//! is a self-contained IVF fragment holding centroids only for its
//! resident clusters, addressed by dense local ids; the cold index keeps
//! the full coarse quantizer (coarse quantization stays centralized) with
//! the hot lists removed.

mod io;

pub use io::{load_shard, save_shard};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitioner::PartitionPlan;
use crate::profiler::AccessProfile;
use crate::vecstore::{ClusterList, ClusterShortlist, IvfIndex, ListPayload};

/// Global→(shard, local) routing tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardMap {
    pub n_shards: u16,
    /// global cluster id → (shard id, local cluster id)
    pub hot: BTreeMap<u32, (u16, u32)>,
    pub cold: BTreeSet<u32>,
    pub shard_bytes: Vec<u64>,
}

impl ShardMap {
    pub fn n_clusters(&self) -> usize {
        self.hot.len() + self.cold.len()
    }
}

/// A shard's sub-index: an IVF fragment whose cluster ids are dense
/// locals; `global_ids[local]` recovers the original id.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardIndex {
    pub shard_id: u16,
    pub global_ids: Vec<u32>,
    pub index: IvfIndex,
}

/// Probe buckets for one query after routing: local ids per shard plus
/// global ids for the cold path, each preserving shortlist order.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedProbes {
    pub query_id: u64,
    pub per_shard: Vec<Vec<u32>>,
    pub cold: Vec<u32>,
}

impl RoutedProbes {
    pub fn total_probes(&self) -> usize {
        self.cold.len() + self.per_shard.iter().map(Vec::len).sum::<usize>()
    }
}

/// Splits an index into `n_shards` hot sub-indexes plus the cold
/// remainder, per the plan's hot set.
pub fn split_index(
    index: &IvfIndex,
    profile: &AccessProfile,
    plan: &PartitionPlan,
    n_shards: u16,
) -> Result<(ShardMap, Vec<ShardIndex>, IvfIndex)> {
    if n_shards == 0 {
        return Err(Error::InvalidArgument("n_shards must be >= 1".into()));
    }
    if profile.n_clusters != index.n_clusters() {
        return Err(Error::InvalidArgument(format!(
            "profile covers {} clusters, index has {}",
            profile.n_clusters,
            index.n_clusters()
        )));
    }
    for &c in &plan.hot_cluster_ids {
        if c as usize >= index.n_clusters() {
            return Err(Error::UnknownCluster(c));
        }
    }

    // deal order: descending byte size, ties by ascending id
    let mut deal: Vec<u32> = plan.hot_cluster_ids.clone();
    deal.sort_by(|&a, &b| {
        index
            .cluster_bytes(b)
            .cmp(&index.cluster_bytes(a))
            .then(a.cmp(&b))
    });

    let mut hot = BTreeMap::new();
    let mut shard_members: Vec<Vec<u32>> = vec![Vec::new(); n_shards as usize];
    let mut shard_bytes = vec![0u64; n_shards as usize];
    for (i, &c) in deal.iter().enumerate() {
        let shard = (i % n_shards as usize) as u16;
        let local = shard_members[shard as usize].len() as u32;
        shard_members[shard as usize].push(c);
        shard_bytes[shard as usize] += index.cluster_bytes(c);
        hot.insert(c, (shard, local));
    }
    let cold: BTreeSet<u32> = (0..index.n_clusters() as u32)
        .filter(|c| !hot.contains_key(c))
        .collect();

    let shards: Vec<ShardIndex> = shard_members
        .iter()
        .enumerate()
        .map(|(sid, members)| build_shard(index, sid as u16, members))
        .collect();

    // cold index: full coarse quantizer, hot lists emptied
    let cold_lists: Vec<ClusterList> = index
        .lists()
        .iter()
        .enumerate()
        .map(|(c, list)| {
            if hot.contains_key(&(c as u32)) {
                ClusterList {
                    ids: Vec::new(),
                    payload: match list.payload {
                        ListPayload::F32(_) => ListPayload::F32(Vec::new()),
                        ListPayload::U8(_) => ListPayload::U8(Vec::new()),
                    },
                }
            } else {
                list.clone()
            }
        })
        .collect();
    let cold_index = IvfIndex::from_parts(
        index.dim(),
        index.metric(),
        index.scalar8_params().cloned(),
        index.centroids().to_vec(),
        cold_lists,
    );

    Ok((
        ShardMap {
            n_shards,
            hot,
            cold,
            shard_bytes,
        },
        shards,
        cold_index,
    ))
}

fn build_shard(index: &IvfIndex, shard_id: u16, members: &[u32]) -> ShardIndex {
    let dim = index.dim();
    let mut centroids = Vec::with_capacity(members.len() * dim);
    let mut lists = Vec::with_capacity(members.len());
    for &c in members {
        centroids.extend_from_slice(index.centroid(c));
        lists.push(index.lists()[c as usize].clone());
    }
    ShardIndex {
        shard_id,
        global_ids: members.to_vec(),
        index: IvfIndex::from_parts(
            dim,
            index.metric(),
            index.scalar8_params().cloned(),
            centroids,
            lists,
        ),
    }
}

/// Routes one shortlist through the mapping tables.
pub fn remap(map: &ShardMap, shortlist: &ClusterShortlist) -> Result<RoutedProbes> {
    let mut per_shard: Vec<Vec<u32>> = vec![Vec::new(); map.n_shards as usize];
    let mut cold = Vec::new();
    for &c in &shortlist.cluster_ids {
        if let Some(&(shard, local)) = map.hot.get(&c) {
            per_shard[shard as usize].push(local);
        } else if map.cold.contains(&c) {
            cold.push(c);
        } else {
            return Err(Error::UnknownCluster(c));
        }
    }
    Ok(RoutedProbes {
        query_id: shortlist.query_id,
        per_shard,
        cold,
    })
}

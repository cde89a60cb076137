//! In-memory IVF vector index.
//!
//! An [`IvfIndex`] is a flat coarse quantizer (k-means centroids) over
//! inverted lists of stored vectors. Search runs in two stages: coarse
//! quantization picks the `nprobe` nearest clusters, then the scan stage
//! computes exact distances against every candidate in those clusters
//! (after dequantization when scalar-8 storage is enabled). The index is
//! immutable after construction and safe to share across threads.

pub(crate) mod io;
mod kmeans;

pub use io::{load_dataset, load_index, save_dataset, save_index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_batch, ExecMode};

/// Distance metric. `L2` is squared Euclidean; `InnerProduct` orders by
/// descending dot product (stored as its negation so that smaller is
/// always closer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L2,
    InnerProduct,
}

/// Storage encoding for list payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantizationKind {
    None,
    Scalar8,
}

/// Per-dimension affine dequantization parameters for scalar-8 storage:
/// `value = offset[d] + code * scale[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar8Params {
    pub offset: Vec<f32>,
    pub scale: Vec<f32>,
}

/// A dense set of vectors with stable 64-bit identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    dim: usize,
    ids: Vec<u64>,
    data: Vec<f32>, // row-major, ids.len() * dim
}

impl VectorDataset {
    pub fn new(dim: usize, ids: Vec<u64>, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        if ids.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset" });
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateId(w[0]));
            }
        }
        Ok(Self { dim, ids, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }
}

/// One inverted list: vector ids plus their stored payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterList {
    pub ids: Vec<u64>,
    pub payload: ListPayload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ListPayload {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

impl ClusterList {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Bytes occupied by ids plus payload, the unit used for shard balancing.
    pub fn payload_bytes(&self, dim: usize) -> u64 {
        let elem = match self.payload {
            ListPayload::F32(_) => 4,
            ListPayload::U8(_) => 1,
        };
        (self.ids.len() * (8 + dim * elem)) as u64
    }
}

/// Immutable IVF index: coarse-quantizer centroids plus inverted lists.
#[derive(Debug, Clone, PartialEq)]
pub struct IvfIndex {
    dim: usize,
    metric: Metric,
    quant: Option<Scalar8Params>,
    centroids: Vec<f32>, // n_clusters * dim
    lists: Vec<ClusterList>,
}

/// Nearest-cluster shortlist for one query, ordered by ascending centroid
/// distance with ties broken by ascending cluster id.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterShortlist {
    pub query_id: u64,
    pub cluster_ids: Vec<u32>,
    pub centroid_distances: Vec<f32>,
}

/// Final (or partial) search result: at most `k` hits sorted by ascending
/// distance, ties broken by ascending vector id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopK {
    pub query_id: u64,
    pub hits: Vec<(u64, f32)>,
}

impl TopK {
    pub fn empty(query_id: u64) -> Self {
        Self {
            query_id,
            hits: Vec::new(),
        }
    }
}

#[inline]
fn l2_sq(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[inline]
fn neg_dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    -acc
}

#[inline]
pub(crate) fn metric_distance(metric: Metric, a: &[f32], b: &[f32]) -> f32 {
    match metric {
        Metric::L2 => l2_sq(a, b),
        Metric::InnerProduct => neg_dot(a, b),
    }
}

#[inline]
fn dist_u8(metric: Metric, query: &[f32], codes: &[u8], params: &Scalar8Params) -> f32 {
    let mut acc = 0.0f32;
    match metric {
        Metric::L2 => {
            for d in 0..query.len() {
                let v = params.offset[d] + codes[d] as f32 * params.scale[d];
                let diff = query[d] - v;
                acc += diff * diff;
            }
            acc
        }
        Metric::InnerProduct => {
            for d in 0..query.len() {
                let v = params.offset[d] + codes[d] as f32 * params.scale[d];
                acc += query[d] * v;
            }
            -acc
        }
    }
}

/// Bounded collector for the k smallest `(distance, id)` pairs under the
/// total order (distance, then id).
struct TopKHeap {
    k: usize,
    // max-heap on (dist, id); the root is the current worst kept hit
    heap: std::collections::BinaryHeap<HeapHit>,
}

struct HeapHit(f32, u64);

impl PartialEq for HeapHit {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapHit {}
impl PartialOrd for HeapHit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapHit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl TopKHeap {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: std::collections::BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    fn push(&mut self, dist: f32, id: u64) {
        if self.k == 0 {
            return;
        }
        if self.heap.len() < self.k {
            self.heap.push(HeapHit(dist, id));
        } else {
            let worst = self.heap.peek().expect("non-empty");
            if HeapHit(dist, id).cmp(worst) == std::cmp::Ordering::Less {
                self.heap.pop();
                self.heap.push(HeapHit(dist, id));
            }
        }
    }

    fn into_sorted(self) -> Vec<(u64, f32)> {
        let mut hits: Vec<(u64, f32)> = self.heap.into_iter().map(|h| (h.1, h.0)).collect();
        hits.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        hits
    }
}

impl IvfIndex {
    pub(crate) fn from_parts(
        dim: usize,
        metric: Metric,
        quant: Option<Scalar8Params>,
        centroids: Vec<f32>,
        lists: Vec<ClusterList>,
    ) -> Self {
        debug_assert_eq!(centroids.len(), lists.len() * dim);
        Self {
            dim,
            metric,
            quant,
            centroids,
            lists,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn quantization(&self) -> QuantizationKind {
        if self.quant.is_some() {
            QuantizationKind::Scalar8
        } else {
            QuantizationKind::None
        }
    }

    pub fn scalar8_params(&self) -> Option<&Scalar8Params> {
        self.quant.as_ref()
    }

    pub fn n_clusters(&self) -> usize {
        self.lists.len()
    }

    pub fn centroid(&self, cluster: u32) -> &[f32] {
        let c = cluster as usize;
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn centroids(&self) -> &[f32] {
        &self.centroids
    }

    pub fn list(&self, cluster: u32) -> Result<&ClusterList> {
        self.lists
            .get(cluster as usize)
            .ok_or(Error::UnknownCluster(cluster))
    }

    pub fn lists(&self) -> &[ClusterList] {
        &self.lists
    }

    /// Total number of stored vectors across all lists.
    pub fn n_vectors(&self) -> usize {
        self.lists.iter().map(|l| l.len()).sum()
    }

    /// Storage footprint of one cluster (ids + payload + centroid row).
    pub fn cluster_bytes(&self, cluster: u32) -> u64 {
        self.lists[cluster as usize].payload_bytes(self.dim) + (self.dim * 4) as u64
    }

    fn check_query(&self, query: &[f32]) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "query" });
        }
        Ok(())
    }

    /// Exhaustive nearest-centroid shortlist for one query.
    pub fn coarse_quantize_one(
        &self,
        query_id: u64,
        query: &[f32],
        nprobe: usize,
    ) -> Result<ClusterShortlist> {
        self.check_query(query)?;
        if nprobe == 0 {
            return Err(Error::InvalidArgument("nprobe must be >= 1".into()));
        }
        let mut dists: Vec<(f32, u32)> = (0..self.n_clusters() as u32)
            .map(|c| (metric_distance(self.metric, query, self.centroid(c)), c))
            .collect();
        dists.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dists.truncate(nprobe.min(self.n_clusters()));
        Ok(ClusterShortlist {
            query_id,
            cluster_ids: dists.iter().map(|d| d.1).collect(),
            centroid_distances: dists.iter().map(|d| d.0).collect(),
        })
    }

    /// Coarse quantization for a batch of queries.
    pub fn coarse_quantize(
        &self,
        queries: &[Vec<f32>],
        nprobe: usize,
        mode: ExecMode,
    ) -> Result<Vec<ClusterShortlist>> {
        for q in queries {
            self.check_query(q)?;
        }
        if nprobe == 0 {
            return Err(Error::InvalidArgument("nprobe must be >= 1".into()));
        }
        let shortlists = map_batch(mode, queries, |q| {
            self.coarse_quantize_one(0, q, nprobe).expect("validated")
        });
        Ok(shortlists
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                s.query_id = i as u64;
                s
            })
            .collect())
    }

    /// Exact scan of the named clusters, returning the top-k hits.
    pub fn scan_clusters(
        &self,
        query_id: u64,
        query: &[f32],
        cluster_ids: &[u32],
        k: usize,
    ) -> Result<TopK> {
        self.check_query(query)?;
        let mut heap = TopKHeap::new(k);
        for &c in cluster_ids {
            let list = self.list(c)?;
            match &list.payload {
                ListPayload::F32(data) => {
                    for (i, &id) in list.ids.iter().enumerate() {
                        let row = &data[i * self.dim..(i + 1) * self.dim];
                        heap.push(metric_distance(self.metric, query, row), id);
                    }
                }
                ListPayload::U8(codes) => {
                    let params = self.quant.as_ref().expect("scalar8 payload implies params");
                    for (i, &id) in list.ids.iter().enumerate() {
                        let row = &codes[i * self.dim..(i + 1) * self.dim];
                        heap.push(dist_u8(self.metric, query, row, params), id);
                    }
                }
            }
        }
        Ok(TopK {
            query_id,
            hits: heap.into_sorted(),
        })
    }

    /// Monolithic search: coarse quantization plus scan for each query.
    /// With `nprobe = n_clusters` and unquantized storage this is exact
    /// brute-force k-NN.
    pub fn search(&self, queries: &[Vec<f32>], nprobe: usize, k: usize) -> Result<Vec<TopK>> {
        self.search_with(queries, nprobe, k, ExecMode::default())
    }

    pub fn search_with(
        &self,
        queries: &[Vec<f32>],
        nprobe: usize,
        k: usize,
        mode: ExecMode,
    ) -> Result<Vec<TopK>> {
        for q in queries {
            self.check_query(q)?;
        }
        if nprobe == 0 {
            return Err(Error::InvalidArgument("nprobe must be >= 1".into()));
        }
        let results = map_batch(mode, queries, |q| {
            let shortlist = self.coarse_quantize_one(0, q, nprobe).expect("validated");
            self.scan_clusters(0, q, &shortlist.cluster_ids, k)
                .expect("shortlist ids are valid")
        });
        Ok(results
            .into_iter()
            .enumerate()
            .map(|(i, mut t)| {
                t.query_id = i as u64;
                t
            })
            .collect())
    }
}

/// Trains an IVF index with k-means++ seeding and Lloyd iterations
/// (capped at 25 or relative centroid movement below 1e-4). Deterministic
/// for a fixed `(dataset, n_clusters, seed)` triple.
pub fn train_ivf(
    dataset: &VectorDataset,
    n_clusters: usize,
    quantization: QuantizationKind,
    metric: Metric,
    seed: u64,
) -> Result<IvfIndex> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_clusters == 0 {
        return Err(Error::InvalidArgument("n_clusters must be >= 1".into()));
    }
    if n_clusters > dataset.len() {
        return Err(Error::TooManyClusters {
            n_clusters,
            len: dataset.len(),
        });
    }

    let quant = match quantization {
        QuantizationKind::None => None,
        QuantizationKind::Scalar8 => Some(kmeans::scalar8_params(dataset)),
    };

    // Stored representation first: assignments are made against what the
    // index will actually hold, so the nearest-centroid invariant is
    // checkable on the stored index.
    let stored: Vec<f32> = match &quant {
        None => dataset.data.clone(),
        Some(p) => {
            let codes = kmeans::encode_scalar8(dataset, p);
            let mut out = Vec::with_capacity(codes.len());
            for (i, &c) in codes.iter().enumerate() {
                let d = i % dataset.dim;
                out.push(p.offset[d] + c as f32 * p.scale[d]);
            }
            out
        }
    };

    let centroids = kmeans::train(&stored, dataset.dim, dataset.len(), n_clusters, metric, seed);
    let assignments = kmeans::assign_all(&stored, dataset.dim, &centroids, n_clusters, metric);

    let mut lists: Vec<ClusterList> = (0..n_clusters)
        .map(|_| ClusterList {
            ids: Vec::new(),
            payload: match quantization {
                QuantizationKind::None => ListPayload::F32(Vec::new()),
                QuantizationKind::Scalar8 => ListPayload::U8(Vec::new()),
            },
        })
        .collect();

    let codes = quant.as_ref().map(|p| kmeans::encode_scalar8(dataset, p));
    for (i, &c) in assignments.iter().enumerate() {
        let list = &mut lists[c as usize];
        list.ids.push(dataset.ids[i]);
        match (&mut list.payload, &codes) {
            (ListPayload::F32(data), None) => data.extend_from_slice(dataset.row(i)),
            (ListPayload::U8(data), Some(codes)) => {
                data.extend_from_slice(&codes[i * dataset.dim..(i + 1) * dataset.dim])
            }
            _ => unreachable!(),
        }
    }

    Ok(IvfIndex::from_parts(
        dataset.dim,
        metric,
        quant,
        centroids,
        lists,
    ))
}

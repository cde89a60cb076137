//! Synthetic datasets and query workloads.
//!
//! Vectors come from a Gaussian mixture with well-separated modes; query
//! popularity over modes is either uniform or Zipf-distributed through a
//! seeded rank-to-mode permutation, so hot modes differ across seeds.
//! Everything is deterministic for a fixed seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::vecstore::VectorDataset;

/// Popularity of query modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Popularity {
    Uniform,
    Zipf { s: f64 },
}

/// Gaussian-mixture generator shared by dataset and query synthesis.
#[derive(Debug, Clone)]
pub struct Mixture {
    dim: usize,
    centers: Vec<f32>, // n_modes * dim
    mode_std: f32,
}

impl Mixture {
    /// Mode centers drawn i.i.d. N(0, separation²) per coordinate.
    pub fn new(dim: usize, n_modes: usize, separation: f32, mode_std: f32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..n_modes * dim)
            .map(|_| {
                let z: f32 = StandardNormal.sample(&mut rng);
                z * separation
            })
            .collect();
        Self {
            dim,
            centers,
            mode_std,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn sample_near(&self, mode: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
        let center = &self.centers[mode * self.dim..(mode + 1) * self.dim];
        center
            .iter()
            .map(|&c| {
                let z: f32 = StandardNormal.sample(rng);
                c + z * self.mode_std
            })
            .collect()
    }

    /// A balanced dataset: point `i` belongs to mode `i % n_modes`.
    pub fn dataset(&self, n: usize, seed: u64) -> Result<VectorDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * self.dim);
        for i in 0..n {
            data.extend(self.sample_near(i % self.n_modes(), &mut rng));
        }
        VectorDataset::new(self.dim, (0..n as u64).collect(), data)
    }

    /// A balanced query stream: query `i` targets mode `i % n_modes`,
    /// so every mode receives exactly the same load.
    pub fn queries_balanced(&self, n: usize, seed: u64) -> Vec<Vec<f32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| self.sample_near(i % self.n_modes(), &mut rng))
            .collect()
    }

    /// Queries with mode popularity assigned through a seeded permutation
    /// of popularity ranks.
    pub fn queries(&self, n: usize, popularity: Popularity, seed: u64) -> Vec<Vec<f32>> {
        let n_modes = self.n_modes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank_to_mode = permutation(n_modes, &mut rng);
        let cdf = popularity_cdf(n_modes, popularity);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let rank = cdf.partition_point(|&c| c < u).min(n_modes - 1);
                self.sample_near(rank_to_mode[rank], &mut rng)
            })
            .collect()
    }
}

fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Cumulative distribution over popularity ranks.
fn popularity_cdf(n: usize, popularity: Popularity) -> Vec<f64> {
    let weights: Vec<f64> = match popularity {
        Popularity::Uniform => vec![1.0; n],
        Popularity::Zipf { s } => (1..=n).map(|k| (k as f64).powf(-s)).collect(),
    };
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect()
}


/// A calibrated synthetic desk scenario: Zipf-skewed cluster accesses
/// over 256 clusters with an 18 GB full index, CPU latency curves steep
/// enough that a moderate SLO needs caching, and an LLM whose KV budget
/// the full index would displace heavily.
pub mod desk {
    use crate::partitioner::{LatencyModel, LlmModel, MemoryModel, SloConfig};
    use crate::profiler::{AccessProfile, PiecewiseLinear};
    use crate::simulator::ScenarioConfig;

    pub const N_CLUSTERS: usize = 256;
    pub const FULL_INDEX_BYTES: u64 = 18_000_000_000;

    /// Zipf(s = 1.2) access profile over the cluster ranking.
    pub fn profile() -> AccessProfile {
        let mut counts: Vec<u64> = (1..=N_CLUSTERS)
            .map(|k| ((k as f64).powf(-1.2) * 1e7) as u64 + 1)
            .collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        AccessProfile {
            n_clusters: N_CLUSTERS,
            total_accesses: counts.iter().sum(),
            counts,
            ranking: (0..N_CLUSTERS as u32).collect(),
            cluster_bytes: vec![FULL_INDEX_BYTES / N_CLUSTERS as u64; N_CLUSTERS],
        }
    }

    pub fn slo() -> SloConfig {
        SloConfig::new(200.0, 150.0)
    }

    pub fn latency() -> LatencyModel {
        LatencyModel {
            t_cq: PiecewiseLinear::affine(2.0, 0.1),
            t_lut: PiecewiseLinear::affine(60.0, 9.0),
        }
    }

    pub fn llm() -> LlmModel {
        LlmModel {
            mu0_rps: 100.0,
            prefill_ms: PiecewiseLinear::constant(40.0),
            decode_ms_per_token: 2.0,
            output_tokens: 64,
        }
    }

    pub fn memory() -> MemoryModel {
        MemoryModel {
            kvcache_bytes: 40_000_000_000,
            param_bytes: 30_000_000_000,
        }
    }

    pub const SIGMA2_MAX: f64 = 0.04;

    /// Scenario with the tiered coverage left at zero; callers plan and
    /// fill in `rho`.
    pub fn scenario(seed: u64) -> ScenarioConfig {
        let profile = profile();
        let curve = crate::profiler::coverage_curve(&profile).expect("non-empty profile");
        ScenarioConfig {
            version: 1,
            seed,
            duration_s: 60.0,
            slo: slo(),
            latency: latency(),
            sigma2_max: SIGMA2_MAX,
            curve: curve.points,
            rho: 0.0,
            llm: llm(),
            mem: memory(),
            gpu_speedup: 10.0,
            n_accelerators: 4,
            dedicated_count: 1,
            max_batch: None,
            dispatcher_on: true,
            inputs: Default::default(),
        }
    }
}
